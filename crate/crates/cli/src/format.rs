//! Stable CSV output: fixed columns, LF endings, numbers to a set number of
//! significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// `x` rounded to `digits` significant digits, fixed notation for moderate
/// exponents and scientific otherwise, trailing zeros removed.
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.into()
    }
}

/// A cell in an output table.
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self, precision: usize) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match c {
                    Cell::Num(v) => out.push_str(&sig(*v, precision)),
                    Cell::Int(v) => {
                        let _ = write!(out, "{v}");
                    }
                    Cell::Text(s) => out.push_str(&quote(s)),
                    Cell::Empty => {}
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path, precision: usize) -> Result<(), CliError> {
        std::fs::write(path, self.render(precision)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(0.9048374180359595, 6), "0.904837");
        assert_eq!(sig(0.02, 12), "0.02");
        assert_eq!(sig(1.0, 12), "1");
        assert_eq!(sig(5.0, 12), "5");
        assert_eq!(sig(123456.789, 4), "1.235e5");
        assert_eq!(sig(123456.789, 6), "123457");
        assert_eq!(sig(1.5e-9, 3), "1.5e-9");
        assert_eq!(sig(-2.5e20, 3), "-2.5e20");
        assert_eq!(sig(-1e-20, 3), "-1e-20");
        assert_eq!(sig(0.0, 3), "0");
        assert_eq!(sig(f64::NAN, 3), "nan");
        // rounding that carries into the next decade
        assert_eq!(sig(9.9999999, 3), "10");
    }

    #[test]
    fn renders_lf_csv() {
        let mut t = Table::new(&["a", "b", "c", "d"]);
        t.push(vec![1.25.into(), 3usize.into(), "x,y".into(), Cell::Empty]);
        assert_eq!(t.render(12), "a,b,c,d\n1.25,3,\"x,y\",\n");
        assert_eq!(t.len(), 1);
    }
}
