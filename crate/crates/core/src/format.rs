//! Plain-text scheme files.
//!
//! ```text
//! scheme v1
//! n 1
//! N 2
//! Ni 1
//! No 1
//! A
//! 1 2
//! 10
//! B
//! 1 2
//! 01
//! T
//! 2 2
//! 01
//! 10
//! nonlinear feistel.nlmap
//! ```
//!
//! The `nonlinear` path is resolved against the scheme file's directory.
//! Multi-branch files start with `multibranch v1`, give `n`, `N` (words per
//! copy), `copies`, `branches`, the base `T`, then per branch a `branch j`
//! line followed by `A`, `B` and `nonlinear` sections.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::keyed_map::{parse_field, KeyedMap};
use crate::multibranch::{Branch, MultiBranchParts, MultiBranchSpec};
use crate::sandwich::{Dims, SchemeParts, SchemeSpec};

struct Lines<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            items: text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect(),
            pos: 0,
        }
    }

    fn line_no(&self) -> usize {
        self.items
            .get(self.pos)
            .map(|p| p.0)
            .unwrap_or(self.items.len() + 1)
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let item = self
            .items
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::Parse {
                line: self.line_no(),
                msg: format!("unexpected end of file, expected {what}"),
            })?;
        self.pos += 1;
        Ok(item)
    }

    fn expect(&mut self, literal: &str) -> Result<()> {
        let (line, text) = self.next(&format!("'{literal}'"))?;
        if text != literal {
            return Err(Error::Parse {
                line,
                msg: format!("expected '{literal}', got '{text}'"),
            });
        }
        Ok(())
    }

    fn field<T: std::str::FromStr>(&mut self, name: &str) -> Result<T> {
        let item = self.next(name)?;
        parse_field(item, name)
    }

    fn matrix(&mut self, name: &str) -> Result<BitMatrix> {
        self.expect(name)?;
        let first = self.line_no();
        let mut rest = self.items[self.pos..].iter().map(|p| p.1);
        let (m, used) = BitMatrix::parse_lines(&mut rest, first)?;
        self.pos += used;
        Ok(m)
    }

    fn nonlinear(&mut self) -> Result<(usize, String)> {
        let (line, text) = self.next("nonlinear <path>")?;
        let path = text
            .strip_prefix("nonlinear ")
            .filter(|p| !p.is_empty())
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected 'nonlinear <path>', got '{text}'"),
            })?;
        Ok((line, path.to_string()))
    }

    fn finish(&mut self) -> Result<()> {
        while let Some(&(line, text)) = self.items.get(self.pos) {
            if !text.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: format!("trailing content '{text}'"),
                });
            }
            self.pos += 1;
        }
        Ok(())
    }
}

/// A parsed scheme file whose core has not been loaded yet.
#[derive(Clone, Debug)]
pub struct SchemeText {
    pub dims: Dims,
    pub a: BitMatrix,
    pub b: BitMatrix,
    pub t: BitMatrix,
    pub nonlinear: String,
    pub nonlinear_line: usize,
}

pub fn parse_scheme_text(text: &str) -> Result<SchemeText> {
    let mut lines = Lines::new(text);
    lines.expect("scheme v1")?;
    let n = lines.field("n")?;
    let words = lines.field("N")?;
    let words_in = lines.field("Ni")?;
    let words_out = lines.field("No")?;
    let a = lines.matrix("A")?;
    let b = lines.matrix("B")?;
    let t = lines.matrix("T")?;
    let (nonlinear_line, nonlinear) = lines.nonlinear()?;
    lines.finish()?;
    Ok(SchemeText {
        dims: Dims::new(n, words, words_in, words_out),
        a,
        b,
        t,
        nonlinear,
        nonlinear_line,
    })
}

fn load_core(dir: &Path, rel: &str, line: usize) -> Result<KeyedMap> {
    let path = dir.join(rel);
    let text = fs::read_to_string(&path).map_err(|e| Error::Parse {
        line,
        msg: format!("cannot read nonlinear map {}: {e}", path.display()),
    })?;
    KeyedMap::from_text(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

fn parent(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Parses a scheme file and loads its core without validating.
pub fn read_scheme_parts(path: &Path) -> Result<SchemeParts> {
    let text = fs::read_to_string(path)?;
    let parsed = parse_scheme_text(&text)?;
    let core = load_core(&parent(path), &parsed.nonlinear, parsed.nonlinear_line)?;
    Ok(SchemeParts {
        dims: parsed.dims,
        a: parsed.a,
        b: parsed.b,
        t: parsed.t,
        core,
    })
}

/// Parses a scheme file, loads its core and validates the result.
pub fn read_scheme(path: &Path) -> Result<SchemeSpec> {
    SchemeSpec::new(read_scheme_parts(path)?)
}

pub fn scheme_to_text(spec: &SchemeSpec, nonlinear: &str) -> String {
    let d = spec.dims();
    format!(
        "scheme v1\nn {}\nN {}\nNi {}\nNo {}\nA\n{}B\n{}T\n{}nonlinear {nonlinear}\n",
        d.n,
        d.words,
        d.words_in,
        d.words_out,
        spec.a().to_text(),
        spec.b().to_text(),
        spec.t().to_text()
    )
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scheme".into())
}

/// Writes the scheme file and its core as `<stem>.nlmap` next to it.
/// Returns the path of the core file.
pub fn write_scheme(path: &Path, spec: &SchemeSpec) -> Result<PathBuf> {
    let core_name = format!("{}.nlmap", stem(path));
    let core_path = parent(path).join(&core_name);
    fs::write(&core_path, spec.core().to_text())?;
    fs::write(path, scheme_to_text(spec, &core_name))?;
    Ok(core_path)
}

pub fn multibranch_to_text(spec: &MultiBranchSpec, nonlinear: &[String]) -> String {
    let mut s = format!(
        "multibranch v1\nn {}\nN {}\ncopies {}\nbranches {}\nT\n{}",
        spec.word_size(),
        spec.words_per_copy(),
        spec.copies(),
        spec.branches().len(),
        spec.t_base().to_text()
    );
    for (j, (br, nl)) in spec.branches().iter().zip(nonlinear).enumerate() {
        s.push_str(&format!(
            "branch {}\nA\n{}B\n{}nonlinear {nl}\n",
            j + 1,
            br.a.to_text(),
            br.b.to_text()
        ));
    }
    s
}

/// Writes the file and one `<stem>_f<j>.nlmap` per branch.
pub fn write_multibranch(path: &Path, spec: &MultiBranchSpec) -> Result<Vec<PathBuf>> {
    let dir = parent(path);
    let names: Vec<String> = (1..=spec.branches().len())
        .map(|j| format!("{}_f{j}.nlmap", stem(path)))
        .collect();
    let mut written = Vec::new();
    for (br, name) in spec.branches().iter().zip(&names) {
        let p = dir.join(name);
        fs::write(&p, br.core.to_text())?;
        written.push(p);
    }
    fs::write(path, multibranch_to_text(spec, &names))?;
    Ok(written)
}

pub fn read_multibranch(path: &Path) -> Result<MultiBranchSpec> {
    let text = fs::read_to_string(path)?;
    let dir = parent(path);
    let mut lines = Lines::new(&text);
    lines.expect("multibranch v1")?;
    let n = lines.field("n")?;
    let words = lines.field("N")?;
    let copies = lines.field("copies")?;
    let count: usize = lines.field("branches")?;
    let t_base = lines.matrix("T")?;
    let mut branches = Vec::with_capacity(count);
    for j in 1..=count {
        lines.expect(&format!("branch {j}"))?;
        let a = lines.matrix("A")?;
        let b = lines.matrix("B")?;
        let (line, rel) = lines.nonlinear()?;
        branches.push(Branch {
            a,
            b,
            core: load_core(&dir, &rel, line)?,
        });
    }
    lines.finish()?;
    MultiBranchSpec::new(MultiBranchParts {
        n,
        words,
        copies,
        t_base,
        branches,
    })
}

/// Either kind of file, told apart by the header line.
#[derive(Clone, Debug)]
pub enum AnyScheme {
    Single(SchemeSpec),
    Multi(MultiBranchSpec),
}

pub fn read_any(path: &Path) -> Result<AnyScheme> {
    let text = fs::read_to_string(path)?;
    if text.starts_with("multibranch v1") {
        read_multibranch(path).map(AnyScheme::Multi)
    } else {
        read_scheme(path).map(AnyScheme::Single)
    }
}
