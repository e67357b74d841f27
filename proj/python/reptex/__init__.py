"""Representative texture extraction from facade images."""

from ._reptex import (
    ReptexError,
    boundary_factor,
    davies_bouldin,
    descriptor_embed,
    extract,
    generate_tiled_image,
    kmeans,
    load_image,
    make_brick_tile,
    ncc_score,
    run_pipeline,
    sample_candidates,
    save_image,
    select_k,
    tile_texture,
    width_factor,
)

__all__ = [
    "ReptexError",
    "boundary_factor",
    "davies_bouldin",
    "descriptor_embed",
    "extract",
    "generate_tiled_image",
    "kmeans",
    "load_image",
    "make_brick_tile",
    "ncc_score",
    "run_pipeline",
    "sample_candidates",
    "save_image",
    "select_k",
    "tile_texture",
    "width_factor",
]
