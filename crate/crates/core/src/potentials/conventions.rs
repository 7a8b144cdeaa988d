//! Substitution conventions for the F4 closed forms.
//!
//! Every closed form has the shape
//!
//! ```text
//! V = M · |Y|^{-γ} · [ μ(γ) · S · F4(1, 2-γ; 2, 1-γ; S, Y) + 1 ]
//! ```
//!
//! where `S` and `Y` are the hat variables of the family (each carrying a
//! sign `ε`), `M` is a fixed monomial and `μ` the inner factor. The values
//! below were found by the exact search in [`crate::calibrate`] and are
//! re-checked by it in the test suite.
//!
//! | family       | S                              | Y                              | M     | μ     |
//! |--------------|--------------------------------|--------------------------------|-------|-------|
//! | ellipse      | `x²/λ`                         | `-y²/λ`                        | 1     | `1-γ` |
//! | jacobi       | `c(a-c) y² / (b(b-a) z²)`      | `c(c-b) x² / (a(b-a) z²)`      | `z⁻²` | `1-γ` |
//! | curved       | `x²(B-C) / (y²(C-A))`          | `K z²(A-B) / (y²(C-A))`        | `y⁻²` | `1-γ` |
//! | ellipsoid3d  | `-x²/γ_ax + y²/β_ax`           | `z²/γ_ax`                      | 1     | `1-γ` |
//! | symmetric-n  | `Σ_{i<n} x_i² / (A-C)`         | `x_n² / (C-A)`                 | 1     | `1-γ` |
//!
//! The symmetric-`n` hat variables are a reconstruction by analogy with the
//! three-dimensional symmetric case; they are accepted because the
//! resulting potential passes the exact system-(4) residual test for
//! `n = 3, 4, 5`.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Ellipse,
    Jacobi,
    Curved,
    Ellipsoid3d,
    SymmetricN,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Ellipse,
        Family::Jacobi,
        Family::Curved,
        Family::Ellipsoid3d,
        Family::SymmetricN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ellipse => "ellipse",
            Family::Jacobi => "jacobi",
            Family::Curved => "curved",
            Family::Ellipsoid3d => "ellipsoid3d",
            Family::SymmetricN => "symmetric-n",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| crate::Error::Parse(format!("unknown family {s:?}")))
    }
}

/// Arrangement of the Jacobi hat variables relative to the printed
/// `x̂ = x² c(a-c) / (z²(b-a) a)`, `ŷ = y² c(c-b) / (z²(b-a) b)`.
/// Other families only use `Printed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HatLayout {
    Printed,
    /// `x²` and `y²` exchanged between the two hats.
    SwapNumerators,
    /// The `a` and `b` denominators exchanged.
    SwapDenominators,
    SwapBoth,
}

impl HatLayout {
    pub const ALL: [HatLayout; 4] = [
        HatLayout::Printed,
        HatLayout::SwapNumerators,
        HatLayout::SwapDenominators,
        HatLayout::SwapBoth,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerFactor {
    /// `μ = 1`, the bracket as printed.
    Unit,
    /// `μ = 1 - γ`.
    OneMinusGamma,
}

impl InnerFactor {
    pub fn value(self, gamma: f64) -> f64 {
        match self {
            InnerFactor::Unit => 1.0,
            InnerFactor::OneMinusGamma => 1.0 - gamma,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Convention {
    pub family: Family,
    pub layout: HatLayout,
    pub s_sign: i8,
    pub y_sign: i8,
    pub inner: InnerFactor,
}

impl Convention {
    /// The hat variables and bracket exactly as printed.
    pub const fn printed(family: Family) -> Self {
        Convention { family, layout: HatLayout::Printed, s_sign: 1, y_sign: 1, inner: InnerFactor::Unit }
    }
}

pub const ELLIPSE: Convention = Convention {
    family: Family::Ellipse,
    layout: HatLayout::Printed,
    s_sign: 1,
    y_sign: 1,
    inner: InnerFactor::OneMinusGamma,
};

pub const JACOBI: Convention = Convention {
    family: Family::Jacobi,
    layout: HatLayout::SwapBoth,
    s_sign: 1,
    y_sign: 1,
    inner: InnerFactor::OneMinusGamma,
};

pub const CURVED: Convention = Convention {
    family: Family::Curved,
    layout: HatLayout::Printed,
    s_sign: 1,
    y_sign: 1,
    inner: InnerFactor::OneMinusGamma,
};

pub const ELLIPSOID3D: Convention = Convention {
    family: Family::Ellipsoid3d,
    layout: HatLayout::Printed,
    s_sign: 1,
    y_sign: 1,
    inner: InnerFactor::OneMinusGamma,
};

pub const SYMMETRIC_N: Convention = Convention {
    family: Family::SymmetricN,
    layout: HatLayout::Printed,
    s_sign: 1,
    y_sign: 1,
    inner: InnerFactor::OneMinusGamma,
};

pub fn committed(family: Family) -> Convention {
    match family {
        Family::Ellipse => ELLIPSE,
        Family::Jacobi => JACOBI,
        Family::Curved => CURVED,
        Family::Ellipsoid3d => ELLIPSOID3D,
        Family::SymmetricN => SYMMETRIC_N,
    }
}
