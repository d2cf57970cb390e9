//! Rendering tables to images with an external renderer, and turning
//! images into network input tensors.

mod assets;
mod preprocess;
mod renderer;

pub use assets::{fetch_assets, FetchedHtml};
pub use preprocess::{bilinear_resize, preprocess, preprocess_image, ImageTensor};
pub use renderer::{
    render_all, render_table, wrap_fragment, AssetPolicy, RenderJob, RenderOutcome, RendererConfig,
    DEFAULT_RENDERER, DEFAULT_TIMEOUT_SECS, DEFAULT_VIEWPORT_WIDTH, RENDERER_ENV,
};
