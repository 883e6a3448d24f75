//! Plain-text particle CSV: header `id,x,y,z,mass`, with the z column
//! omitted for 2-d data.

use super::Particle;
use crate::error::{Error, Result};
use std::io::{BufRead, Write};

pub fn write_particles_csv<W: Write>(w: &mut W, particles: &[Particle], dim: usize) -> std::io::Result<()> {
    if dim == 2 {
        writeln!(w, "id,x,y,mass")?;
    } else {
        writeln!(w, "id,x,y,z,mass")?;
    }
    for p in particles {
        if dim == 2 {
            writeln!(w, "{},{:?},{:?},{:?}", p.id, p.position[0], p.position[1], p.mass)?;
        } else {
            writeln!(
                w,
                "{},{:?},{:?},{:?},{:?}",
                p.id, p.position[0], p.position[1], p.position[2], p.mass
            )?;
        }
    }
    Ok(())
}

/// Reads particles back, returning the data and its dimensionality.
/// Ids must be dense and start at 0.
pub fn read_particles_csv<R: BufRead>(r: R) -> Result<(Vec<Particle>, usize)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ParticleCsv("empty file".into()))?
        .map_err(|e| Error::ParticleCsv(e.to_string()))?;
    let dim = match header.trim() {
        "id,x,y,mass" => 2,
        "id,x,y,z,mass" => 3,
        other => {
            return Err(Error::ParticleCsv(format!(
                "unexpected header {other:?}"
            )))
        }
    };
    let mut particles = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::ParticleCsv(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(Error::ParticleCsv(format!(
                "line {}: expected {} fields, got {}",
                lineno + 2,
                dim + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::ParticleCsv(format!("line {}: {e}", lineno + 2)))
        };
        let id: u32 = fields[0]
            .trim()
            .parse()
            .map_err(|e| Error::ParticleCsv(format!("line {}: {e}", lineno + 2)))?;
        let mut position = [0.0f64; 3];
        for a in 0..dim {
            position[a] = parse(fields[1 + a])?;
        }
        let mass = parse(fields[dim + 1])?;
        particles.push(Particle { position, mass, id });
    }
    for (i, p) in particles.iter().enumerate() {
        if p.id != i as u32 {
            return Err(Error::ParticleCsv(format!(
                "ids must be dense from 0; found {} at row {i}",
                p.id
            )));
        }
    }
    Ok((particles, dim))
}
