//! CSV emission: `#` metadata lines, a header row, shortest round-trip floats.

use std::io::{self, Write};

pub struct CsvWriter<W: Write> {
    out: W,
    buf: ryu::Buffer,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            out,
            buf: ryu::Buffer::new(),
            columns: 0,
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> io::Result<()> {
        writeln!(self.out, "# {key}: {value}")
    }

    pub fn header(&mut self, names: &[&str]) -> io::Result<()> {
        self.columns = names.len();
        writeln!(self.out, "{}", names.join(","))
    }

    pub fn row(&mut self, values: &[f64]) -> io::Result<()> {
        debug_assert_eq!(values.len(), self.columns);
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.out.write_all(b",")?;
            }
            self.out.write_all(self.buf.format(*v).as_bytes())?;
        }
        self.out.write_all(b"\n")
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Formats a float the way CSV cells are written.
pub fn fmt_float(v: f64) -> String {
    ryu::Buffer::new().format(v).to_owned()
}
