//! Analytic scalar fields used as data and exact solutions.

/// A scalar function on the plane.
pub trait ScalarField: Sync {
    fn value(&self, x: f64, y: f64) -> f64;
}

impl<F> ScalarField for F
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn value(&self, x: f64, y: f64) -> f64 {
        self(x, y)
    }
}

/// A scalar field with closed-form first and second derivatives.
pub trait ExactField: ScalarField {
    fn gradient(&self, x: f64, y: f64) -> [f64; 2];

    /// `[[u_xx, u_xy], [u_xy, u_yy]]`
    fn hessian(&self, x: f64, y: f64) -> [[f64; 2]; 2];
}

/// Field defined by explicit closures for the value and its derivatives.
pub struct ClosureField<V, G, H> {
    pub value: V,
    pub gradient: G,
    pub hessian: H,
}

impl<V, G, H> ScalarField for ClosureField<V, G, H>
where
    V: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> [f64; 2] + Sync,
    H: Fn(f64, f64) -> [[f64; 2]; 2] + Sync,
{
    fn value(&self, x: f64, y: f64) -> f64 {
        (self.value)(x, y)
    }
}

impl<V, G, H> ExactField for ClosureField<V, G, H>
where
    V: Fn(f64, f64) -> f64 + Sync,
    G: Fn(f64, f64) -> [f64; 2] + Sync,
    H: Fn(f64, f64) -> [[f64; 2]; 2] + Sync,
{
    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        (self.gradient)(x, y)
    }

    fn hessian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        (self.hessian)(x, y)
    }
}

/// Affine field `a x + b y + c`.
#[derive(Clone, Copy, Debug)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ScalarField for Affine {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }
}

impl ExactField for Affine {
    fn gradient(&self, _x: f64, _y: f64) -> [f64; 2] {
        [self.a, self.b]
    }

    fn hessian(&self, _x: f64, _y: f64) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }
}
