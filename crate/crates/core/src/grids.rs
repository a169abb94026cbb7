//! Sampling fields onto rectangular grids and exporting them as CSV/JSON.
//!
//! Samples sit at cell centres `lo + (i + 0.5)·(hi − lo)/n`, so open axis
//! ranges are never evaluated at their endpoints. A sample where the field
//! function fails is stored as a masked cell.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{ComplexValue, Error, Result};

/// Default resolution of 2-D grids per axis.
pub const DEFAULT_2D_RESOLUTION: usize = 256;
/// Default resolution of 1-D grids.
pub const DEFAULT_1D_RESOLUTION: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let axis = Axis { name: name.into(), lo, hi, n };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::domain(format!(
                "axis {} needs lo < hi, got [{}, {}]",
                self.name, self.lo, self.hi
            )));
        }
        if self.n == 0 {
            return Err(Error::domain(format!("axis {} needs at least one cell", self.name)));
        }
        Ok(())
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * (self.hi - self.lo) / self.n as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.center(i)).collect()
    }
}

/// Row-major complex grid: `values[j * x_axis.n + i]` is the cell at
/// `(x_i, y_j)`. `None` marks a masked cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub values: Vec<Option<ComplexValue>>,
    pub generator: String,
}

impl FieldGrid {
    pub fn get(&self, i: usize, j: usize) -> Option<ComplexValue> {
        self.values[j * self.x_axis.n + i]
    }

    pub fn masked_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// Samples `f(x, y)` at every cell centre. Rows are evaluated in parallel;
/// the result does not depend on scheduling.
pub fn sample_grid<F>(f: F, x_axis: Axis, y_axis: Axis, generator: impl Into<String>) -> Result<FieldGrid>
where
    F: Fn(f64, f64) -> Result<ComplexValue> + Sync,
{
    x_axis.validate()?;
    y_axis.validate()?;
    let xs = x_axis.centers();
    let values: Vec<Option<ComplexValue>> = (0..y_axis.n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let y = y_axis.center(j);
            let f = &f;
            xs.iter().map(move |&x| {
                f(x, y).ok().filter(|v| v.re.is_finite() && v.im.is_finite())
            })
        })
        .collect();
    Ok(FieldGrid { x_axis, y_axis, values, generator: generator.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim_start_matches("fig").trim_start_matches("Fig") {
            "3" => Ok(Figure::Fig3),
            "4" => Ok(Figure::Fig4),
            "5" => Ok(Figure::Fig5),
            "6" => Ok(Figure::Fig6),
            other => Err(Error::Parse(format!("unknown figure '{other}', expected 3, 4, 5 or 6"))),
        }
    }
}

impl Figure {
    /// Caption ranges `(x range, Z range)`; `None` for the 1-D figures.
    pub fn ranges(self) -> (Option<(f64, f64)>, (f64, f64)) {
        match self {
            Figure::Fig3 => (Some((0.0, 1.0)), (0.0, 1_000.0)),
            Figure::Fig4 => (Some((0.0, 700.0)), (0.0, 100_000.0)),
            Figure::Fig5 => (None, (0.0, 1_000.0)),
            Figure::Fig6 => (None, (0.0, 100_000.0)),
        }
    }

    pub fn is_one_dimensional(self) -> bool {
        self.ranges().0.is_none()
    }

    pub fn number(self) -> u8 {
        match self {
            Figure::Fig3 => 3,
            Figure::Fig4 => 4,
            Figure::Fig5 => 5,
            Figure::Fig6 => 6,
        }
    }
}

/// Paraxial profile `ln(x/(2y))·cos(ky)/(ky)` with `x = r`, `y = Z`.
pub fn paraxial_profile(k: f64, x: f64, y: f64) -> f64 {
    (x / (2.0 * y)).ln() * (k * y).cos() / (k * y)
}

/// Spherical wave `cos(ky)/(ky)`.
pub fn spherical_profile(k: f64, y: f64) -> f64 {
    (k * y).cos() / (k * y)
}

/// Grid behind one of the schematic plots. For the 1-D figures `n_x` is
/// forced to 1 and the x axis is a placeholder `(0, 1)`.
pub fn figure_grid(figure: Figure, k: f64, n_x: usize, n_y: usize) -> Result<FieldGrid> {
    crate::field::check_wavenumber(k)?;
    let (x_range, (y_lo, y_hi)) = figure.ranges();
    let y_axis = Axis::new("Z", y_lo, y_hi, n_y)?;
    let id = figure.number();
    match x_range {
        Some((x_lo, x_hi)) => {
            if n_x < 2 || n_y < 2 {
                return Err(Error::domain("2-D figure grids need n_x, n_y >= 2"));
            }
            let x_axis = Axis::new("r", x_lo, x_hi, n_x)?;
            sample_grid(
                |x, y| Ok(ComplexValue::new(paraxial_profile(k, x, y), 0.0)),
                x_axis,
                y_axis,
                format!("fig{id} k={k} f=ln(x/(2y))*cos(k*y)/(k*y)"),
            )
        }
        None => {
            if n_y < 2 {
                return Err(Error::domain("1-D figure grids need n_y >= 2"));
            }
            let x_axis = Axis::new("unused", 0.0, 1.0, 1)?;
            sample_grid(
                |_, y| Ok(ComplexValue::new(spherical_profile(k, y), 0.0)),
                x_axis,
                y_axis,
                format!("fig{id} k={k} f=cos(k*y)/(k*y)"),
            )
        }
    }
}

/// CSV with header `x,y,re,im`, one row per cell (y outer, x inner). Masked
/// cells leave `re` and `im` empty. Numbers use the shortest decimal that
/// round-trips.
pub fn to_csv(grid: &FieldGrid) -> String {
    let mut out = String::with_capacity(32 * grid.values.len() + 16);
    out.push_str("x,y,re,im\n");
    let xs = grid.x_axis.centers();
    for j in 0..grid.y_axis.n {
        let y = grid.y_axis.center(j);
        for (i, &x) in xs.iter().enumerate() {
            match grid.get(i, j) {
                Some(v) => writeln!(out, "{x},{y},{},{}", v.re, v.im),
                None => writeln!(out, "{x},{y},,"),
            }
            .expect("writing to a String cannot fail");
        }
    }
    out
}

pub fn export_csv(grid: &FieldGrid, path: &Path) -> Result<()> {
    write_file(path, to_csv(grid).as_bytes())
}

/// One parsed CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvCell {
    pub x: f64,
    pub y: f64,
    pub value: Option<ComplexValue>,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvCell>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("x,y,re,im") => {}
        other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
    }
    let num = |s: &str, line: usize| {
        s.parse::<f64>().map_err(|e| Error::Parse(format!("line {line}: '{s}': {e}")))
    };
    lines
        .enumerate()
        .map(|(idx, line)| {
            let line_no = idx + 2;
            let fields: Vec<&str> = line.split(',').collect();
            let [x, y, re, im] = fields[..] else {
                return Err(Error::Parse(format!("line {line_no}: expected 4 fields")));
            };
            let value = match (re, im) {
                ("", "") => None,
                (re, im) => Some(ComplexValue::new(num(re, line_no)?, num(im, line_no)?)),
            };
            Ok(CsvCell { x: num(x, line_no)?, y: num(y, line_no)?, value })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GridDocument {
    x_axis: Axis,
    y_axis: Axis,
    generator: String,
    re: Vec<Vec<Option<f64>>>,
    im: Vec<Vec<Option<f64>>>,
    mask: Vec<Vec<bool>>,
}

/// Single JSON object with keys `x_axis`, `y_axis`, `generator`, `re`, `im`
/// and `mask`; the value arrays are nested row-major (`[y][x]`), masked
/// cells hold `null`.
pub fn to_json(grid: &FieldGrid) -> String {
    let rows = |pick: fn(&ComplexValue) -> f64| -> Vec<Vec<Option<f64>>> {
        grid.values
            .chunks(grid.x_axis.n)
            .map(|row| row.iter().map(|v| v.as_ref().map(pick)).collect())
            .collect()
    };
    let doc = GridDocument {
        x_axis: grid.x_axis.clone(),
        y_axis: grid.y_axis.clone(),
        generator: grid.generator.clone(),
        re: rows(|v| v.re),
        im: rows(|v| v.im),
        mask: grid.values.chunks(grid.x_axis.n).map(|row| row.iter().map(Option::is_none).collect()).collect(),
    };
    let mut text = serde_json::to_string(&doc).expect("grid document serialises");
    text.push('\n');
    text
}

pub fn export_json(grid: &FieldGrid, path: &Path) -> Result<()> {
    write_file(path, to_json(grid).as_bytes())
}

pub fn parse_json(text: &str) -> Result<FieldGrid> {
    let doc: GridDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("grid JSON: {e}")))?;
    doc.x_axis.validate()?;
    doc.y_axis.validate()?;
    let (nx, ny) = (doc.x_axis.n, doc.y_axis.n);
    fn shape_ok<T>(rows: &[Vec<T>], nx: usize, ny: usize) -> bool {
        rows.len() == ny && rows.iter().all(|r| r.len() == nx)
    }
    if !(shape_ok(&doc.re, nx, ny) && shape_ok(&doc.im, nx, ny) && shape_ok(&doc.mask, nx, ny)) {
        return Err(Error::Parse(format!("grid arrays do not match the {ny}x{nx} axes")));
    }
    let mut values = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let cell = match (doc.mask[j][i], doc.re[j][i], doc.im[j][i]) {
                (true, _, _) => None,
                (false, Some(re), Some(im)) => Some(ComplexValue::new(re, im)),
                _ => return Err(Error::Parse(format!("unmasked cell ({i}, {j}) has no value"))),
            };
            values.push(cell);
        }
    }
    Ok(FieldGrid { x_axis: doc.x_axis, y_axis: doc.y_axis, values, generator: doc.generator })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{eval_field, BeamSpec, SphericalPoint};
    use std::f64::consts::PI;

    fn unit_square(n: usize) -> (Axis, Axis) {
        (Axis::new("x", 0.0, 1.0, n).unwrap(), Axis::new("y", 0.0, 1.0, n).unwrap())
    }

    #[test]
    fn constant_grid() {
        let (x, y) = unit_square(2);
        let g = sample_grid(|_, _| Ok(ComplexValue::new(1.0, 0.0)), x, y, "one").unwrap();
        assert_eq!(g.values, vec![Some(ComplexValue::new(1.0, 0.0)); 4]);
    }

    #[test]
    fn cell_centres() {
        let (x, y) = unit_square(2);
        let g = sample_grid(|x, y| Ok(ComplexValue::new(x, y)), x, y, "xy").unwrap();
        assert_eq!(g.get(0, 0), Some(ComplexValue::new(0.25, 0.25)));
        assert_eq!(g.get(1, 0), Some(ComplexValue::new(0.75, 0.25)));
        assert_eq!(g.get(0, 1), Some(ComplexValue::new(0.25, 0.75)));
        assert_eq!(g.get(1, 1), Some(ComplexValue::new(0.75, 0.75)));
    }

    #[test]
    fn field_grid_matches_pointwise_calls() {
        let beam = BeamSpec::new(1.0, 1.0).unwrap();
        let x = Axis::new("R", 0.1, 3.0, 7).unwrap();
        let y = Axis::new("theta", 0.0, PI, 9).unwrap();
        let f = |r: f64, t: f64| Ok(eval_field(&beam, &SphericalPoint::new(r, t, 0.0)?)?.0);
        let g = sample_grid(f, x.clone(), y.clone(), "exact").unwrap();
        for j in 0..y.n {
            for i in 0..x.n {
                let direct = f(x.center(i), y.center(j)).unwrap();
                assert_eq!(g.get(i, j).unwrap(), direct);
            }
        }
    }

    #[test]
    fn failures_are_masked() {
        let (x, y) = unit_square(2);
        let g = sample_grid(
            |x, _| if x < 0.5 { Err(Error::domain("left")) } else { Ok(ComplexValue::new(f64::NAN, 0.0)) },
            x,
            y,
            "masked",
        )
        .unwrap();
        assert_eq!(g.masked_count(), 4);
    }

    #[test]
    fn csv_format() {
        let x = Axis::new("x", 0.0, 1.0, 1).unwrap();
        let y = Axis::new("y", 0.0, 1.0, 1).unwrap();
        let g = sample_grid(|_, _| Ok(ComplexValue::new(1.0, 2.0)), x.clone(), y.clone(), "c").unwrap();
        assert_eq!(to_csv(&g), "x,y,re,im\n0.5,0.5,1,2\n");
        let m = sample_grid(|_, _| Err(Error::domain("no")), x, y, "m").unwrap();
        assert_eq!(to_csv(&m), "x,y,re,im\n0.5,0.5,,\n");
    }

    #[test]
    fn json_schema() {
        let x = Axis::new("x", 0.0, 1.0, 1).unwrap();
        let y = Axis::new("y", 0.0, 1.0, 1).unwrap();
        let g = sample_grid(|_, _| Ok(ComplexValue::new(1.0, 2.0)), x, y, "c").unwrap();
        let v: serde_json::Value = serde_json::from_str(&to_json(&g)).unwrap();
        let obj = v.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["generator", "im", "mask", "re", "x_axis", "y_axis"]);
        assert_eq!(v["re"], serde_json::json!([[1.0]]));
        assert_eq!(v["im"], serde_json::json!([[2.0]]));
        assert_eq!(v["mask"], serde_json::json!([[false]]));
    }

    #[test]
    fn figure_ranges() {
        let g = figure_grid(Figure::Fig3, 1.0, 4, 4).unwrap();
        assert_eq!((g.x_axis.lo, g.x_axis.hi, g.y_axis.lo, g.y_axis.hi), (0.0, 1.0, 0.0, 1000.0));
        let g = figure_grid(Figure::Fig4, 1.0, 4, 4).unwrap();
        assert_eq!((g.x_axis.lo, g.x_axis.hi, g.y_axis.lo, g.y_axis.hi), (0.0, 700.0, 0.0, 100_000.0));
        let g = figure_grid(Figure::Fig6, 1.0, 99, 8).unwrap();
        assert_eq!(g.x_axis.n, 1);
        assert_eq!((g.y_axis.lo, g.y_axis.hi), (0.0, 100_000.0));
        assert!(g.generator.starts_with("fig6 k=1"));
    }

    #[test]
    fn fig5_near_pi() {
        let g = figure_grid(Figure::Fig5, 1.0, 1, DEFAULT_1D_RESOLUTION).unwrap();
        let width = 1000.0 / DEFAULT_1D_RESOLUTION as f64;
        let j = (PI / width) as usize;
        let centre = g.y_axis.center(j);
        assert!((centre - PI).abs() <= width / 2.0);
        let v = g.get(0, j).unwrap().re;
        assert_eq!(v, centre.cos() / centre);
        assert!((v - (-1.0 / PI)).abs() < 0.01);
    }

    #[test]
    fn figure_parsing() {
        assert_eq!("3".parse::<Figure>().unwrap(), Figure::Fig3);
        assert_eq!("fig6".parse::<Figure>().unwrap(), Figure::Fig6);
        assert!("7".parse::<Figure>().is_err());
    }
}
