//! Robot dynamics `x' = f(x, u)` and the fixed-step integrator shared by
//! the controller's rollouts and the simulator.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scalar::Scalar;

/// Continuous-time model with `N` states and `M` inputs.
pub trait Dynamics<T: Scalar, const N: usize, const M: usize> {
    fn derivative(&self, state: &[T; N], u: &[T; M]) -> [T; N];
    /// Planar position carried by the state.
    fn position(&self, state: &[T; N]) -> Point2<T>;
}

/// One classical fourth-order Runge-Kutta step under constant `u`.
pub fn rk4_step<T: Scalar, D: Dynamics<T, N, M>, const N: usize, const M: usize>(
    model: &D,
    state: &[T; N],
    u: &[T; M],
    dt: T,
) -> [T; N] {
    let half = dt / T::lit(2.0);
    let offset =
        |base: &[T; N], k: &[T; N], h: T| -> [T; N] { std::array::from_fn(|i| base[i] + k[i] * h) };
    let k1 = model.derivative(state, u);
    let k2 = model.derivative(&offset(state, &k1, half), u);
    let k3 = model.derivative(&offset(state, &k2, half), u);
    let k4 = model.derivative(&offset(state, &k3, dt), u);
    let sixth = dt / T::lit(6.0);
    std::array::from_fn(|i| state[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]))
}

/// Kinematic unicycle: state `(x, y, theta)`, input `(v, w)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Unicycle;

impl<T: Scalar> Dynamics<T, 3, 2> for Unicycle {
    #[inline]
    fn derivative(&self, s: &[T; 3], u: &[T; 2]) -> [T; 3] {
        let (sin, cos) = s[2].sin_cos();
        [u[0] * cos, u[0] * sin, u[1]]
    }

    #[inline]
    fn position(&self, s: &[T; 3]) -> Point2<T> {
        Point2::new(s[0], s[1])
    }
}

/// Axis-aligned control box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlBounds<T, const M: usize> {
    pub lo: [T; M],
    pub hi: [T; M],
}

impl<T: Scalar, const M: usize> ControlBounds<T, M> {
    pub fn new(lo: [T; M], hi: [T; M]) -> Result<Self> {
        for i in 0..M {
            if !(lo[i].is_finite() && hi[i].is_finite() && lo[i] < hi[i]) {
                return Err(Error::Config(format!(
                    "control bound {i} must satisfy lo < hi, got [{}, {}]",
                    lo[i], hi[i]
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, u: &[T; M]) -> bool {
        (0..M).all(|i| u[i] >= self.lo[i] && u[i] <= self.hi[i])
    }

    pub fn clamp(&self, u: [T; M]) -> [T; M] {
        std::array::from_fn(|i| u[i].max(self.lo[i]).min(self.hi[i]))
    }
}

impl<T: Scalar> ControlBounds<T, 2> {
    /// `[-7, 7] x [-5, 5]`.
    pub fn unicycle_default() -> Self {
        Self {
            lo: [T::lit(-7.0), T::lit(-5.0)],
            hi: [T::lit(7.0), T::lit(5.0)],
        }
    }
}
