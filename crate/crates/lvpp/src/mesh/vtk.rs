use std::io::Write;

use super::Mesh;
use crate::error::{Error, Result};

enum Data<'a> {
    Scalars(&'a str, &'a [f64]),
    Vectors(&'a str, &'a [[f64; 2]]),
}

/// Legacy ASCII VTK unstructured-grid writer.
pub struct VtkWriter<'a> {
    mesh: &'a Mesh,
    title: String,
    point: Vec<Data<'a>>,
    cell: Vec<Data<'a>>,
}

impl<'a> VtkWriter<'a> {
    pub fn new(mesh: &'a Mesh, title: impl Into<String>) -> Self {
        VtkWriter { mesh, title: title.into(), point: Vec::new(), cell: Vec::new() }
    }

    pub fn point_scalars(mut self, name: &'a str, values: &'a [f64]) -> Self {
        self.point.push(Data::Scalars(name, values));
        self
    }

    pub fn point_vectors(mut self, name: &'a str, values: &'a [[f64; 2]]) -> Self {
        self.point.push(Data::Vectors(name, values));
        self
    }

    pub fn cell_scalars(mut self, name: &'a str, values: &'a [f64]) -> Self {
        self.cell.push(Data::Scalars(name, values));
        self
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let m = self.mesh;
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "{}", self.title.replace('\n', " "))?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", m.n_vertices())?;
        for p in &m.vertices {
            writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
        }
        writeln!(w, "CELLS {} {}", m.n_cells(), 4 * m.n_cells())?;
        for c in &m.cells {
            writeln!(w, "3 {} {} {}", c[0], c[1], c[2])?;
        }
        writeln!(w, "CELL_TYPES {}", m.n_cells())?;
        for _ in &m.cells {
            writeln!(w, "5")?;
        }
        write_block(&mut w, "POINT_DATA", m.n_vertices(), &self.point)?;
        write_block(&mut w, "CELL_DATA", m.n_cells(), &self.cell)?;
        Ok(())
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(file))
    }
}

fn write_block<W: Write>(w: &mut W, header: &str, n: usize, data: &[Data]) -> Result<()> {
    if data.is_empty() {
        return Ok(());
    }
    writeln!(w, "{header} {n}")?;
    for d in data {
        match d {
            Data::Scalars(name, v) => {
                check_len(name, v.len(), n)?;
                writeln!(w, "SCALARS {name} double 1")?;
                writeln!(w, "LOOKUP_TABLE default")?;
                for x in v.iter() {
                    writeln!(w, "{x:e}")?;
                }
            }
            Data::Vectors(name, v) => {
                check_len(name, v.len(), n)?;
                writeln!(w, "VECTORS {name} double")?;
                for x in v.iter() {
                    writeln!(w, "{:e} {:e} 0", x[0], x[1])?;
                }
            }
        }
    }
    Ok(())
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!("field '{name}' has {got} values, expected {want}")));
    }
    Ok(())
}
