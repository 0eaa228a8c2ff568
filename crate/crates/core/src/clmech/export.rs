use std::io::{self, Write};
use std::sync::Arc;

use num_traits::Float;

use crate::chartkit::{Chart, Var};
use crate::clmech::{PhasePoint, Trajectory};

/// Writes `t, q.., p.., observables..` with twelve significant digits.
///
/// Column names come from `chart` when given, otherwise `q1.., p_q1..`.
pub fn write_trajectory_csv<T: Float, W: Write>(
    out: &mut W,
    tr: &Trajectory<T>,
    chart: Option<&Arc<Chart>>,
    observables: &[(&str, &dyn Fn(&PhasePoint<T>) -> T)],
) -> io::Result<()> {
    let m = tr.first().dim();
    let mut header: Vec<String> = Vec::with_capacity(1 + 2 * m + observables.len());
    match chart {
        Some(c) => {
            header.push(c.time_name().to_string());
            header.extend((0..m).map(|k| c.var_name(Var::Coord(k))));
            header.extend((0..m).map(|k| c.var_name(Var::Momentum(k))));
        }
        None => {
            header.push("t".into());
            header.extend((1..=m).map(|k| format!("q{k}")));
            header.extend((1..=m).map(|k| format!("p_q{k}")));
        }
    }
    header.extend(observables.iter().map(|(n, _)| n.to_string()));
    writeln!(out, "{}", header.join(","))?;
    let fmt = |v: T| format!("{:.11e}", v.to_f64().unwrap_or(f64::NAN));
    for x in &tr.points {
        let mut row = vec![fmt(x.t)];
        row.extend(x.q.iter().map(|v| fmt(*v)));
        row.extend(x.p.iter().map(|v| fmt(*v)));
        row.extend(observables.iter().map(|(_, f)| fmt(f(x))));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartkit::Coordinate;
    use crate::clmech::Method;

    #[test]
    fn csv_layout() {
        let chart = Chart::new("t", vec![Coordinate::line("x")]).unwrap();
        let tr = Trajectory {
            points: vec![PhasePoint::new(0.0, vec![1.0], vec![0.5]), PhasePoint::new(0.5, vec![1.25], vec![0.5])],
            dt: 0.5,
            method: Method::Rk4,
        };
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &tr, Some(&chart), &[("E", &|x: &PhasePoint<f64>| x.p[0] * x.p[0])]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x,p_x,E");
        assert_eq!(lines[1], "0.00000000000e0,1.00000000000e0,5.00000000000e-1,2.50000000000e-1");
        assert_eq!(lines.len(), 3);
    }
}
