use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

/// Comment line carrying the command, crate version and an ISO-8601 timestamp.
pub fn metadata_line(command: &str) -> String {
    format!(
        "# rbdf {command} version={} created={}",
        env!("CARGO_PKG_VERSION"),
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    )
}

/// Metadata line, header row, then one row per record.
pub fn csv_string(command: &str, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = metadata_line(command);
    s.push('\n');
    s.push_str(&header.join(","));
    s.push('\n');
    for row in rows {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v:e}");
        }
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, command: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    fs::write(path, csv_string(command, header, rows))?;
    Ok(())
}

/// Write a body that already starts with its header row.
pub fn write_csv_body(path: &Path, command: &str, body: &str) -> Result<()> {
    fs::write(path, format!("{}\n{body}", metadata_line(command)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let s = csv_string("test", &["t", "e"], &[vec![0.0, 1.5], vec![1.0, 0.25]]);
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# rbdf test version="));
        let stamp = lines[0].split("created=").nth(1).unwrap();
        assert!(chrono::DateTime::parse_from_rfc3339(stamp).is_ok());
        assert_eq!(lines[1], "t,e");
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[2]
                .split(',')
                .map(|x| x.parse::<f64>().unwrap())
                .collect::<Vec<_>>(),
            vec![0.0, 1.5]
        );
    }
}
