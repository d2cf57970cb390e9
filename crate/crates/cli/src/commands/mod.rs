pub mod classify;
pub mod evaluate;
pub mod featurize;
pub mod ingest;
pub mod render;
pub mod split;
pub mod synth;
pub mod train;
