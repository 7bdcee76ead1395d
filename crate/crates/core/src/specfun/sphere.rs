use rand::Rng;
use rand_distr::StandardNormal;

/// Uniform point on the sphere of the given radius in `R^m`, obtained by
/// normalizing a standard Gaussian vector.
pub fn sample_uniform_sphere<R: Rng + ?Sized>(m: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    assert!(m >= 1, "dimension must be positive");
    loop {
        let mut v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let s = radius / norm;
            v.iter_mut().for_each(|x| *x *= s);
            return v;
        }
    }
}
