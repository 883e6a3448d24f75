//! Seeded particle generators for experiments: uniform random and a
//! Plummer-like clustered distribution folded into the unit box.

use super::Particle;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Uniform,
    Plummer,
}

impl std::str::FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(GeneratorKind::Uniform),
            "plummer" => Ok(GeneratorKind::Plummer),
            other => Err(format!("unknown generator {other:?} (uniform|plummer)")),
        }
    }
}

impl std::fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeneratorKind::Uniform => write!(f, "uniform"),
            GeneratorKind::Plummer => write!(f, "plummer"),
        }
    }
}

fn wrap_unit(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Generate `n` particles of equal mass 1/n inside [0,1)^dim.
pub fn generate_particles<R: Rng>(
    kind: GeneratorKind,
    n: usize,
    dim: usize,
    rng: &mut R,
) -> Vec<Particle> {
    let mass = 1.0 / n as f64;
    (0..n)
        .map(|i| {
            let mut position = [0.0f64; 3];
            match kind {
                GeneratorKind::Uniform => {
                    for p in position.iter_mut().take(dim) {
                        *p = rng.gen::<f64>();
                    }
                }
                GeneratorKind::Plummer => {
                    // Plummer radius with scale 0.1, direction uniform on
                    // the sphere/circle, centered in the box and wrapped
                    let u: f64 = rng.gen_range(1e-6..1.0_f64);
                    let r = 0.1 / (u.powf(-2.0 / 3.0) - 1.0).sqrt();
                    let dir = if dim == 2 {
                        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                        [phi.cos(), phi.sin(), 0.0]
                    } else {
                        let z: f64 = rng.gen_range(-1.0..1.0);
                        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                        let s = (1.0 - z * z).sqrt();
                        [s * phi.cos(), s * phi.sin(), z]
                    };
                    for a in 0..dim {
                        position[a] = wrap_unit(0.5 + r * dir[a]);
                    }
                }
            }
            Particle {
                position,
                mass,
                id: i as u32,
            }
        })
        .collect()
}

/// Displace every particle by a small wrapped offset, mimicking the
/// per-step motion that forces data re-collection. Ids are preserved.
pub fn jitter_positions<R: Rng>(particles: &mut [Particle], dim: usize, amplitude: f64, rng: &mut R) {
    for p in particles {
        for a in 0..dim {
            p.position[a] = wrap_unit(p.position[a] + rng.gen_range(-amplitude..amplitude));
        }
    }
}
