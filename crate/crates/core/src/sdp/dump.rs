use std::io::{self, Write};

use super::SdpProblem;

/// Writes the problem in a sparse text format, one nonzero per line:
/// `constraint block row col value`. The objective is constraint 0 and
/// constraints are numbered from 1; scalars are listed as block `s<j>` with
/// row and col 0, and right-hand sides as block `rhs`. Only the upper
/// triangle of each symmetric coefficient is written.
pub fn write_sparse<W: Write>(problem: &SdpProblem, mut out: W) -> io::Result<()> {
    writeln!(out, "# blocks {}", problem.blocks.len())?;
    for (i, b) in problem.blocks.iter().enumerate() {
        writeln!(out, "# block {i} {} {}", b.name, b.size)?;
    }
    for (j, s) in problem.scalars.iter().enumerate() {
        let fmt = |v: Option<f64>| v.map_or("inf".to_string(), |x| format!("{x:e}"));
        writeln!(out, "# scalar {j} {} {} {}", s.name, fmt(s.lower), fmt(s.upper))?;
    }
    writeln!(out, "# objective maximize")?;
    let forms =
        std::iter::once((&problem.objective, None)).chain(problem.constraints.iter().map(|c| (&c.form, Some(c.rhs))));
    for (k, (form, rhs)) in forms.enumerate() {
        for (id, g) in &form.blocks {
            for r in 0..g.rows() {
                for c in r..g.cols() {
                    let v = g[(r, c)];
                    if v != 0.0 {
                        writeln!(out, "{k} {} {r} {c} {v:e}", id.0)?;
                    }
                }
            }
        }
        for (id, g) in &form.scalars {
            if *g != 0.0 {
                writeln!(out, "{k} s{} 0 0 {g:e}", id.0)?;
            }
        }
        if let Some(h) = rhs {
            if h != 0.0 {
                writeln!(out, "{k} rhs 0 0 {h:e}")?;
            }
        }
    }
    Ok(())
}
