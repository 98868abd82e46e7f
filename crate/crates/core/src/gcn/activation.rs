use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Elementwise activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Tanh,
    /// `x / (1 + e^{-x})`.
    Swish,
    /// `e^x - 1` for `x <= 0`, `x` otherwise (unscaled).
    Selu,
}

impl Activation {
    pub const ALL: [Activation; 6] = [
        Activation::Identity,
        Activation::Relu,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Swish,
        Activation::Selu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Swish => "swish",
            Activation::Selu => "selu",
        }
    }

    #[inline]
    pub fn eval<T: Scalar>(self, x: T) -> T {
        let one = T::one();
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(T::zero()),
            Activation::Sigmoid => one / (one + (-x).exp()),
            Activation::Tanh => x.tanh(),
            Activation::Swish => x / (one + (-x).exp()),
            Activation::Selu => {
                if x <= T::zero() {
                    x.exp_m1()
                } else {
                    x
                }
            }
        }
    }

    /// First derivative. ReLU takes the right derivative at 0.
    pub fn derivative<T: Scalar>(self, x: T) -> T {
        let one = T::one();
        match self {
            Activation::Identity => one,
            Activation::Relu => {
                if x >= T::zero() {
                    one
                } else {
                    T::zero()
                }
            }
            Activation::Sigmoid => {
                let s = Activation::Sigmoid.eval(x);
                s * (one - s)
            }
            Activation::Tanh => {
                let t = x.tanh();
                one - t * t
            }
            Activation::Swish => {
                let s = Activation::Sigmoid.eval(x);
                s + x * s * (one - s)
            }
            Activation::Selu => {
                if x <= T::zero() {
                    x.exp()
                } else {
                    one
                }
            }
        }
    }

    /// Second derivative where it exists; one-sided (left) at the kinks of
    /// ReLU and SELU.
    pub fn second_derivative<T: Scalar>(self, x: T) -> T {
        let one = T::one();
        let two = T::lit(2.0);
        match self {
            Activation::Identity | Activation::Relu => T::zero(),
            Activation::Sigmoid => {
                let s = Activation::Sigmoid.eval(x);
                s * (one - s) * (one - two * s)
            }
            Activation::Tanh => {
                let t = x.tanh();
                -two * t * (one - t * t)
            }
            Activation::Swish => {
                let s = Activation::Sigmoid.eval(x);
                let ds = s * (one - s);
                two * ds + x * ds * (one - two * s)
            }
            Activation::Selu => {
                if x <= T::zero() {
                    x.exp()
                } else {
                    T::zero()
                }
            }
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Activation::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown activation {s:?}"))
    }
}

/// Membership in the class of nice activations (`C^2`, `σ(0) = 0`,
/// `σ'(0) = 1`, `σ' <= 1`) or its relaxation that drops `σ'(0) = 1` and only
/// asks for `σ' <= 1` near 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NiceClass {
    Nice,
    ExpandedNice,
    NotNice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationClass {
    pub class: NiceClass,
    /// The first strict clause that fails, if any.
    pub violated: Option<&'static str>,
}

/// Classifies a builtin activation.
///
/// tanh, swish and SELU are reported as expanded-nice as a group, the class
/// in which they are usually quoted. tanh in fact meets every strict clause,
/// so its `violated` is `None`. SELU is listed as expanded-nice although its
/// second derivative jumps at 0.
pub fn classify_activation(a: Activation) -> ActivationClass {
    let (class, violated) = match a {
        Activation::Identity => (NiceClass::Nice, None),
        Activation::Tanh => (NiceClass::ExpandedNice, None),
        Activation::Swish => (NiceClass::ExpandedNice, Some("σ'(0) = 1 (σ'(0) = 1/2)")),
        Activation::Selu => (NiceClass::ExpandedNice, Some("C² (σ'' jumps at 0)")),
        Activation::Relu => (NiceClass::NotNice, Some("C² (kink at 0)")),
        Activation::Sigmoid => (NiceClass::NotNice, Some("σ(0) = 0 (σ(0) = 1/2)")),
    };
    ActivationClass { class, violated }
}
