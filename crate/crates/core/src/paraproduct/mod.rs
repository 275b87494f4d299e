//! Paraproducts and bilinear estimates: the Bony split, bilinear symbols with
//! frequency-interaction pieces, and ratio checks of the Leibniz, chain-rule
//! and quintic inequalities.

mod bony;
mod estimates;
mod symbol;

pub use bony::{bony_split, BonySplit, LOW_OFFSET, PAIR_WINDOW};
pub use estimates::{
    chain_ensemble, chain_pointwise_ratio, chain_ratio, chain_sides, classical_leibniz_ensemble,
    classical_leibniz_ratio, classical_leibniz_sides, leibniz_ensemble, leibniz_ratio, leibniz_sides,
    quintic_ensemble, quintic_hardy_ratio, quintic_sides, ChainExponents, ClassicalExponents,
    LeibnizExponents, PacketEnsemble, Sides,
};
pub use symbol::{bilinear_apply, hh_cancellation_check, hh_regression, BilinearSymbol, Interaction};
