//! Output targets for parsed and analyzed documents.

mod html;
mod json;
pub(crate) mod markup;
mod text;

pub use html::render_html;
pub use json::{render_json, SCHEMA_VERSION};
pub use markup::{blocks_markup, render_markup};
pub use text::{render_text, TextOptions};
