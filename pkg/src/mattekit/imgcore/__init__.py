"""Image types and pixel-level primitives shared by the rest of the toolkit."""
from .components import connected_components
from .io import (
    image_size,
    list_images,
    quantize,
    read_gray,
    read_image,
    write_gray,
    write_image,
    write_mask,
)
from .morphology import dilate, erode
from .pyramid import gaussian_pyramid_reduce, laplacian_pyramid, reconstruct
from .resize import resize
from .types import as_alpha, as_image, as_mask, check_same_shape

__all__ = [
    "as_alpha",
    "as_image",
    "as_mask",
    "check_same_shape",
    "connected_components",
    "dilate",
    "erode",
    "gaussian_pyramid_reduce",
    "image_size",
    "laplacian_pyramid",
    "list_images",
    "quantize",
    "read_gray",
    "read_image",
    "reconstruct",
    "resize",
    "write_gray",
    "write_image",
    "write_mask",
]
