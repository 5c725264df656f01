pub mod checks;
pub mod commands;
pub mod printer;
pub mod syntax;
