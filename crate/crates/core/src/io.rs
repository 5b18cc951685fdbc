//! Text formats: Pauli sums and dense complex matrices.
//!
//! Dense matrix files start with a `d d` header followed by `d` rows of `d`
//! whitespace-separated entries `re±imj`. Entries are written with 17
//! significant digits so that reading a written file reproduces every double
//! exactly.

use std::fs;
use std::path::Path;

use crate::error::CliError;
use crate::hamiltonian::HermitianOperator;
use crate::linalg::{ComplexMatrix, C64};

/// Largest register accepted by the Pauli parser (dense `2ⁿ × 2ⁿ` output).
pub const MAX_PAULI_QUBITS: usize = 12;

/// One term `c · P` with `P` a Pauli string, leftmost letter acting on the
/// most significant tensor factor.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub paulis: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    pub qubits: usize,
    pub terms: Vec<PauliTerm>,
}

impl PauliSum {
    /// Dense matrix `Σ_k c_k P_k`, assembled column by column: each Pauli
    /// string maps `|b⟩` to a phase times `|b ⊕ x⟩`.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.qubits;
        let dim = 1usize << n;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for term in &self.terms {
            let mut flip = 0usize;
            for (q, ch) in term.paulis.bytes().enumerate() {
                if ch == b'X' || ch == b'Y' {
                    flip |= 1 << (n - 1 - q);
                }
            }
            for col in 0..dim {
                let mut phase = C64::new(term.coeff, 0.0);
                for (q, ch) in term.paulis.bytes().enumerate() {
                    let bit = (col >> (n - 1 - q)) & 1;
                    match (ch, bit) {
                        (b'Z', 1) => phase = -phase,
                        // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                        (b'Y', 0) => phase *= C64::new(0.0, 1.0),
                        (b'Y', 1) => phase *= C64::new(0.0, -1.0),
                        _ => {}
                    }
                }
                m[(col ^ flip, col)] += phase;
            }
        }
        m
    }
}

/// Parses `<real coefficient> <Pauli string>` lines; blank lines and lines
/// starting with `#` are skipped.
pub fn parse_pauli_terms(text: &str) -> Result<PauliSum, CliError> {
    let mut qubits = None;
    let mut terms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let offset = raw.len() - trimmed.len();
        let mut fields = trimmed.split_whitespace();
        let coeff_text = fields.next().unwrap_or_default();
        let coeff: f64 = coeff_text.parse().map_err(|_| {
            CliError::parse(
                format!("line {line_no}, column {}", offset + 1),
                format!("coefficient '{coeff_text}' is not a real number"),
            )
        })?;
        if !coeff.is_finite() {
            return Err(CliError::parse(format!("line {line_no}, column {}", offset + 1), "coefficient must be finite"));
        }
        let Some(paulis) = fields.next() else {
            return Err(CliError::parse(format!("line {line_no}"), "missing Pauli string after the coefficient"));
        };
        if let Some(extra) = fields.next() {
            return Err(CliError::parse(format!("line {line_no}"), format!("unexpected trailing field '{extra}'")));
        }
        let after_coeff = offset + coeff_text.len();
        let pauli_col = after_coeff + raw[after_coeff..].find(paulis).unwrap_or(0) + 1;
        for (k, ch) in paulis.chars().enumerate() {
            if !matches!(ch, 'I' | 'X' | 'Y' | 'Z') {
                return Err(CliError::parse(
                    format!("line {line_no}, column {}", pauli_col + k),
                    format!("invalid Pauli letter '{ch}' (expected I, X, Y or Z)"),
                ));
            }
        }
        let n = paulis.len();
        match qubits {
            None => qubits = Some(n),
            Some(q) if q != n => {
                return Err(CliError::parse(
                    format!("line {line_no}, column {pauli_col}"),
                    format!("Pauli string has length {n}, earlier terms have length {q}"),
                ))
            }
            _ => {}
        }
        terms.push(PauliTerm { coeff, paulis: paulis.to_string() });
    }
    let qubits = qubits.ok_or_else(|| CliError::parse("input", "no Pauli terms found"))?;
    if qubits > MAX_PAULI_QUBITS {
        return Err(CliError::Config(format!("{qubits} qubits exceeds the dense limit of {MAX_PAULI_QUBITS}")));
    }
    Ok(PauliSum { qubits, terms })
}

/// `H = Σ_k c_k P_k` as a validated Hermitian operator.
pub fn parse_pauli_sum(text: &str) -> Result<HermitianOperator, CliError> {
    let sum = parse_pauli_terms(text)?;
    Ok(HermitianOperator::new(sum.to_matrix())?)
}

/// `re±imj` with 17 significant digits in each part.
pub fn format_complex(z: C64) -> String {
    format!("{:.16e}{:+.16e}j", z.re, z.im)
}

pub fn parse_complex(token: &str) -> Result<C64, String> {
    let body = token.strip_suffix('j').ok_or_else(|| format!("entry '{token}' does not end in 'j'"))?;
    let bytes = body.as_bytes();
    // the imaginary sign is the last '+'/'-' that is neither leading nor an exponent sign
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(|| format!("entry '{token}' has no imaginary part"))?;
    let re: f64 = body[..split].parse().map_err(|_| format!("bad real part '{}' in '{token}'", &body[..split]))?;
    let im: f64 = body[split..].parse().map_err(|_| format!("bad imaginary part '{}' in '{token}'", &body[split..]))?;
    Ok(C64::new(re, im))
}

pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| format_complex(m[(r, c)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses the dense format. The header must read `d d`.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, CliError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hdr_idx, header) = lines.next().ok_or_else(|| CliError::parse("line 1", "empty matrix file"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || CliError::parse(format!("line {}", hdr_idx + 1), format!("expected header 'd d', found '{}'", header.trim()));
    if dims.len() != 2 {
        return Err(bad_header());
    }
    let rows: usize = dims[0].parse().map_err(|_| bad_header())?;
    let cols: usize = dims[1].parse().map_err(|_| bad_header())?;
    if rows != cols || rows == 0 {
        return Err(bad_header());
    }
    let d = rows;
    let mut data = Vec::with_capacity(d * d);
    let mut found = 0;
    for (idx, line) in lines {
        if found == d {
            return Err(CliError::parse(format!("line {}", idx + 1), format!("expected {d} rows, found extra data")));
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != d {
            return Err(CliError::parse(
                format!("line {}", idx + 1),
                format!("expected {d} entries in row {}, found {}", found + 1, tokens.len()),
            ));
        }
        for (k, tok) in tokens.iter().enumerate() {
            let z = parse_complex(tok).map_err(|msg| CliError::parse(format!("line {}, entry {}", idx + 1, k + 1), msg))?;
            data.push(z);
        }
        found += 1;
    }
    if found != d {
        return Err(CliError::parse("end of file", format!("expected {d} rows, found {found}")));
    }
    ComplexMatrix::from_row_major(d, d, data).map_err(CliError::from)
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| match e {
        CliError::Parse { location, message } => {
            CliError::Parse { location: format!("{}: {location}", path.display()), message }
        }
        other => other,
    })
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<(), CliError> {
    write_text(path, &format_matrix(m))
}

/// Writes `text`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// A float with 17 significant digits, or an empty field.
pub fn csv_float(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.16e}"))
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
