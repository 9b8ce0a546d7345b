//! Minimal 3-vector helpers. Points are plain `[f64; 3]` arrays in meters.

pub type Point3 = [f64; 3];

#[inline]
pub fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Point3, b: &Point3) -> Point3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn norm_sq(a: &Point3) -> f64 {
    a[0] * a[0] + a[1] * a[1] + a[2] * a[2]
}

#[inline]
pub fn norm(a: &Point3) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist_sq(a: &Point3, b: &Point3) -> f64 {
    norm_sq(&sub(a, b))
}

/// Euclidean distance.
#[inline]
pub fn dist(a: &Point3, b: &Point3) -> f64 {
    dist_sq(a, b).sqrt()
}

#[inline]
pub fn is_finite(a: &Point3) -> bool {
    a.iter().all(|v| v.is_finite())
}
