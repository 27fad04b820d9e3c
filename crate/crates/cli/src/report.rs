use crate::CliError;

/// Header plus rows of preformatted cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let render = |e: csv::Error| CliError::Render(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(render)?;
        for row in &self.rows {
            w.write_record(row).map_err(render)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Render(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Render(e.to_string()))
    }
}

/// Twelve significant digits, fixed notation for moderate magnitudes.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..=15).contains(&magnitude) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - magnitude).max(0) as usize;
    let text = format!("{x:.decimals$}");
    if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    }
}

pub fn dp4(x: f64) -> String {
    format!("{x:.4}")
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(std::f64::consts::SQRT_2), "1.41421356237");
        assert_eq!(sig(364.5), "364.5");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(-0.853553390593), "-0.853553390593");
        assert_eq!(sig(1e-7), "1.00000000000e-7");
        assert_eq!(dp4(1.13807), "1.1381");
    }

    #[test]
    fn csv_quotes_cells() {
        let mut t = Table::new(&["cut", "value"]);
        t.push(vec!["{1,2}".into(), "0.5".into()]);
        assert_eq!(t.to_csv().unwrap(), "cut,value\n\"{1,2}\",0.5\n");
    }
}
