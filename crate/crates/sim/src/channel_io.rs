//! Plain-text channel dumps for fixtures.
//!
//! ```text
//! rdars-channels 1
//! dims <antennas> <elements> <users>
//! gains <bs_rdars> <bs_target> <rdars_target> <bs_user...> <rdars_user...>
//! h_br <rows> <cols>
//! re,im re,im ...          (one line per row)
//! h_bt <len>
//! re,im ...
//! ...
//! ```
//! Blocks appear in the order `h_br`, `h_bt`, `h_rt`, `h_bu[k]`, `h_ru[k]`. Loading
//! needs the configuration for the array layout; user positions are not stored.

use std::fmt::Write as _;

use rdars_core::channel::{ArrayLayout, LinkGains};
use rdars_core::{CMat, CVec, ChannelSet, SystemConfig, C64};

use crate::error::{Result, SimError};

const MAGIC: &str = "rdars-channels 1";

fn write_row(out: &mut String, values: impl Iterator<Item = C64>) {
    let row: Vec<String> = values.map(|z| format!("{:e},{:e}", z.re, z.im)).collect();
    out.push_str(&row.join(" "));
    out.push('\n');
}

fn write_vec(out: &mut String, name: &str, v: &CVec) {
    let _ = writeln!(out, "{name} {}", v.len());
    write_row(out, v.iter().copied());
}

pub fn dump_channels(ch: &ChannelSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "dims {} {} {}", ch.antennas(), ch.elements(), ch.users());
    let g = &ch.gains;
    let gains: Vec<String> = [g.bs_rdars, g.bs_target, g.rdars_target]
        .iter()
        .chain(&g.bs_user)
        .chain(&g.rdars_user)
        .map(|v| format!("{v:e}"))
        .collect();
    let _ = writeln!(out, "gains {}", gains.join(" "));
    let _ = writeln!(out, "h_br {} {}", ch.h_br.nrows(), ch.h_br.ncols());
    for r in 0..ch.h_br.nrows() {
        write_row(&mut out, ch.h_br.row(r).iter().copied());
    }
    write_vec(&mut out, "h_bt", &ch.h_bt);
    write_vec(&mut out, "h_rt", &ch.h_rt);
    for (k, v) in ch.h_bu.iter().enumerate() {
        write_vec(&mut out, &format!("h_bu.{k}"), v);
    }
    for (k, v) in ch.h_ru.iter().enumerate() {
        write_vec(&mut out, &format!("h_ru.{k}"), v);
    }
    out
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

fn bad(line: usize, reason: impl Into<String>) -> SimError {
    SimError::Parse { path: format!("channel dump line {}", line + 1).into(), reason: reason.into() }
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.lines.next().ok_or_else(|| bad(usize::MAX - 1, "unexpected end of input"))
    }

    fn header(&mut self, name: &str) -> Result<Vec<usize>> {
        let (n, line) = self.next()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(name) {
            return Err(bad(n, format!("expected `{name}`")));
        }
        parts.map(|p| p.parse().map_err(|_| bad(n, format!("bad size `{p}`")))).collect()
    }

    fn row(&mut self, len: usize) -> Result<Vec<C64>> {
        let (n, line) = self.next()?;
        let values: Vec<C64> = line
            .split_whitespace()
            .map(|tok| {
                let (re, im) = tok.split_once(',').ok_or_else(|| bad(n, format!("`{tok}` is not re,im")))?;
                let p = |s: &str| s.parse::<f64>().map_err(|_| bad(n, format!("bad number `{s}`")));
                Ok(C64::new(p(re)?, p(im)?))
            })
            .collect::<Result<_>>()?;
        if values.len() != len {
            return Err(bad(n, format!("expected {len} entries, found {}", values.len())));
        }
        Ok(values)
    }

    fn vector(&mut self, name: &str, len: usize) -> Result<CVec> {
        let dims = self.header(name)?;
        if dims != [len] {
            return Err(bad(0, format!("`{name}` has length {dims:?}, expected {len}")));
        }
        Ok(CVec::from_vec(self.row(len)?))
    }
}

pub fn load_channels(text: &str, config: &SystemConfig) -> Result<ChannelSet> {
    let mut r = Reader { lines: text.lines().enumerate() };
    let (n, first) = r.next()?;
    if first.trim() != MAGIC {
        return Err(bad(n, "missing `rdars-channels 1` header"));
    }
    let dims = r.header("dims")?;
    let [m, nel, k] = dims[..] else { return Err(bad(1, "dims needs three sizes")) };
    if m != config.antennas || nel != config.elements || k != config.users {
        return Err(SimError::config(
            "channels",
            format!("dump is {m}×{nel}×{k}, configuration {}×{}×{}", config.antennas, config.elements, config.users),
        ));
    }
    let (n, line) = r.next()?;
    let gains: Vec<f64> = match line.strip_prefix("gains ") {
        Some(rest) => rest
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(n, format!("bad gain `{t}`"))))
            .collect::<Result<_>>()?,
        None => return Err(bad(n, "expected `gains`")),
    };
    if gains.len() != 3 + 2 * k {
        return Err(bad(n, format!("expected {} gains", 3 + 2 * k)));
    }
    if r.header("h_br")? != [nel, m] {
        return Err(bad(2, "h_br must be elements × antennas"));
    }
    let mut h_br = CMat::zeros(nel, m);
    for i in 0..nel {
        for (j, z) in r.row(m)?.into_iter().enumerate() {
            h_br[(i, j)] = z;
        }
    }
    let h_bt = r.vector("h_bt", m)?;
    let h_rt = r.vector("h_rt", nel)?;
    let h_bu = (0..k).map(|i| r.vector(&format!("h_bu.{i}"), m)).collect::<Result<Vec<_>>>()?;
    let h_ru = (0..k).map(|i| r.vector(&format!("h_ru.{i}"), nel)).collect::<Result<Vec<_>>>()?;
    Ok(ChannelSet {
        layout: ArrayLayout::from_config(config),
        h_br,
        h_bu,
        h_ru,
        h_bt,
        h_rt,
        gains: LinkGains {
            bs_rdars: gains[0],
            bs_target: gains[1],
            rdars_target: gains[2],
            bs_user: gains[3..3 + k].to_vec(),
            rdars_user: gains[3 + k..].to_vec(),
        },
        user_positions: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdars_core::{derive_geometry, synthesize_channels};

    #[test]
    fn dump_load_round_trip() {
        let cfg = SystemConfig::desk();
        let g = derive_geometry(&cfg, &cfg.placement).unwrap();
        let ch = synthesize_channels(&cfg, &g, 5).unwrap();
        let back = load_channels(&dump_channels(&ch), &cfg).unwrap();
        assert_eq!(back.h_br, ch.h_br);
        assert_eq!(back.h_bt, ch.h_bt);
        assert_eq!(back.h_rt, ch.h_rt);
        assert_eq!(back.h_bu, ch.h_bu);
        assert_eq!(back.h_ru, ch.h_ru);
        assert_eq!(back.gains, ch.gains);
    }

    #[test]
    fn truncated_dump_rejected() {
        let cfg = SystemConfig::desk();
        let g = derive_geometry(&cfg, &cfg.placement).unwrap();
        let text = dump_channels(&synthesize_channels(&cfg, &g, 5).unwrap());
        let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(load_channels(&cut, &cfg).is_err());
    }
}
