//! Plain-text tables for the console.

/// Left-aligned first column, right-aligned others, widths in chars.
pub fn render(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let width = |c: usize| {
        rows.iter()
            .filter_map(|r| r.get(c))
            .chain(std::iter::once(&header[c]))
            .map(|s| s.chars().count())
            .max()
            .unwrap_or(0)
    };
    let widths: Vec<usize> = (0..cols).map(width).collect();
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (s, &w))| {
                let pad = " ".repeat(w - s.chars().count());
                if i == 0 {
                    format!("{s}{pad}")
                } else {
                    format!("{pad}{s}")
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

/// Inverse of [`render`] for tables without internal double spaces in
/// cells: returns header and rows.
pub fn parse(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let split = |l: &str| l.split("  ").map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect::<Vec<_>>();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().map(split).unwrap_or_default();
    let rows = lines.skip(1).map(split).collect();
    (header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_roundtrip() {
        let header = vec!["dataset".to_string(), "cheby".to_string()];
        let rows = vec![vec!["sbm".to_string(), "82.16 ± 6.64".to_string()]];
        let text = render(&header, &rows);
        assert_eq!(parse(&text), (header, rows));
    }
}
