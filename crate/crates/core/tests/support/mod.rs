pub mod checks;
pub mod models;
pub mod oracles;
pub mod six_image;
