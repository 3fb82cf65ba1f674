//! Fiberwise analysis of finitely generated shift-invariant spaces.
//!
//! A shift-invariant space is the closed span of lattice translates of a
//! finite family of generators. Everything this crate computes happens on
//! the Fourier side, where translates diagonalize: the data attached to a
//! frequency `omega` is the *fiber* sequence `(phi_hat(omega + l))` over the
//! dual lattice, and the objects of interest are small Hermitian matrices
//! built from those fibers:
//!
//! * the Gramian `G(omega)`, whose spectrum encodes Riesz/frame bounds and
//!   whose rank counts independent generators fiber by fiber;
//! * the periodized outer products `A(omega)` attached to a coarser group of
//!   translations, whose ranks decide whether the space is invariant under
//!   that larger group.
//!
//! Modules:
//! * [`lattice`] — exact rational lattices, dual lattices, indices, coset
//!   representatives, fundamental domains.
//! * [`genlib`] — Fourier-domain generator expressions, smooth bump
//!   constructions, lacunary series families, presets, JSON (de)serialization.
//! * [`fiber`] — fiber matrices, spectra, numerical rank, frame reports.
//! * [`invariance`] — rank-equality invariance checks, generator reduction,
//!   rank-drop scans.
//! * [`diagnostics`] — decay envelopes, truncated Gagliardo (fractional
//!   Sobolev) trends, trace continuity scans, local fiber mass.
//! * [`grid`] — deterministic sampling grids with breakpoint exclusion.
//! * [`report`] — serializable reports and CSV emitters shared by the CLI.

#![forbid(unsafe_code)]

pub mod diagnostics;
pub mod error;
pub mod fiber;
pub mod genlib;
pub mod grid;
pub mod invariance;
pub mod lattice;
pub mod rat;
pub mod report;

pub use error::{Error, Result};
