//! Numeric CSV tables with `# key=value` metadata, as written by this crate.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut meta = BTreeMap::new();
        let mut header: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(m) = line.strip_prefix('#') {
                if let Some((k, v)) = m.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            match &header {
                None => header = Some(cells.iter().map(|c| c.to_string()).collect()),
                Some(h) => {
                    if cells.len() != h.len() {
                        return Err(format!("line {}: expected {} columns, got {}", n + 1, h.len(), cells.len()));
                    }
                    let row = cells
                        .iter()
                        .map(|c| c.parse::<f64>().map_err(|_| format!("line {}: '{c}' is not a number", n + 1)))
                        .collect::<Result<Vec<_>, _>>()?;
                    rows.push(row);
                }
            }
        }
        let header = header.ok_or("missing header row")?;
        Ok(Self { meta, header, rows })
    }

    /// Column by name, or by position when `name` is `None`.
    pub fn column(&self, name: Option<&str>, position: usize) -> Result<Vec<f64>, String> {
        let idx = match name {
            Some(n) => self.header.iter().position(|h| h == n).ok_or_else(|| format!("no column named '{n}'"))?,
            None if position < self.header.len() => position,
            None => return Err(format!("table has only {} columns", self.header.len())),
        };
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(|v| v.parse().ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_columns_and_metadata() {
        let t = Table::parse("# rabi_ghz=1\n# t1_ns=inf\na,b,c\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!(t.meta_f64("rabi_ghz"), Some(1.0));
        assert_eq!(t.column(Some("c"), 0).unwrap(), vec![3.0, 6.0]);
        assert_eq!(t.column(None, 1).unwrap(), vec![2.0, 5.0]);
        assert!(t.column(Some("d"), 0).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Table::parse("a,b\n1,2\n3\n").is_err());
        assert!(Table::parse("# only metadata\n").is_err());
    }
}
