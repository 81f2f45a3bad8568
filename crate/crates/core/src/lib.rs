//! Jet-based curvature engine for checking generalized quasi-Einstein
//! structures `Ric + ∇²f − μ df⊗df = λg` on metrics given in a chart.

pub mod conformal;
pub mod curvature;
pub mod expr;
pub mod gqe;
pub mod jet;
pub mod sampling;
pub mod splitting;
pub mod tensor;
pub mod verify;
pub mod zoo;
