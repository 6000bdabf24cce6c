// SPDX-License-Identifier: Apache-2.0

//! GSRC `.blocks` / `.nets` reader.
//!
//! Hard rectilinear blocks with four corners become rotatable rectangles.
//! Terminals are recognised as pin names; by default they are left out of
//! the nets, and nets left with fewer than two blocks are dropped. With
//! [`GsrcOptions::include_terminals`] every terminal becomes an extra 1x1
//! rectangle that takes part in the nets.

use std::collections::HashMap;

use crate::io::IoError;
use crate::model::{Instance, Net, Rect};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GsrcOptions {
    pub include_terminals: bool,
}

/// Counts gathered while parsing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GsrcStats {
    pub blocks: usize,
    pub terminals: usize,
    /// `NumNets` header, or the number of net records when the header is absent.
    pub declared_nets: usize,
    pub parsed_nets: usize,
    pub kept_nets: usize,
    pub dropped_nets: usize,
    pub pins: usize,
}

fn err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Gsrc { line, message: message.into() }
}

/// `Key : value` header lines.
fn header(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once(':')?;
    Some((k.trim(), v.trim()))
}

fn is_skippable(line: &str) -> bool {
    line.is_empty() || line.starts_with('#') || line.starts_with("UCSC") || line.starts_with("UCLA")
}

fn parse_corners(lineno: usize, rest: &str) -> Result<Vec<(i64, i64)>, IoError> {
    let mut out = Vec::new();
    let mut s = rest;
    while let Some(open) = s.find('(') {
        let close = s[open..].find(')').ok_or_else(|| err(lineno, "unterminated corner"))? + open;
        let (x, y) = s[open + 1..close].split_once(',').ok_or_else(|| err(lineno, "corner without comma"))?;
        let x: i64 = x.trim().parse().map_err(|_| err(lineno, format!("bad coordinate `{}`", x.trim())))?;
        let y: i64 = y.trim().parse().map_err(|_| err(lineno, format!("bad coordinate `{}`", y.trim())))?;
        out.push((x, y));
        s = &s[close + 1..];
    }
    Ok(out)
}

/// Close a net record: deduplicate members and keep it if two or more remain.
fn finish<R: Real>(members: Option<Vec<usize>>, nets: &mut Vec<Net<R>>, stats: &mut GsrcStats) {
    let Some(mut members) = members else { return };
    members.sort_unstable();
    members.dedup();
    stats.parsed_nets += 1;
    if members.len() >= 2 {
        stats.kept_nets += 1;
        nets.push(Net::new(members));
    } else {
        stats.dropped_nets += 1;
    }
}

/// Parse a block/net file pair.
pub fn parse_gsrc<R: Real>(
    blocks_text: &str,
    nets_text: &str,
    opts: GsrcOptions,
) -> Result<(Instance<R>, GsrcStats), IoError> {
    let mut stats = GsrcStats::default();
    let mut rects: Vec<Rect> = Vec::new();
    let mut terminals: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut terminal_index: HashMap<String, usize> = HashMap::new();

    for (k, raw) in blocks_text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.trim();
        if is_skippable(line) || header(line).is_some_and(|(key, _)| key.starts_with("Num")) {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let name = tokens.next().unwrap_or_default().to_owned();
        let kind = tokens.next().ok_or_else(|| err(lineno, format!("`{name}` has no block type")))?;
        if index.contains_key(&name) || terminal_index.contains_key(&name) {
            return Err(err(lineno, format!("`{name}` declared twice")));
        }
        match kind {
            "terminal" => {
                terminal_index.insert(name.clone(), terminals.len());
                terminals.push(name);
            }
            "hardrectilinear" => {
                let count: usize =
                    tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(lineno, "missing corner count"))?;
                let after = line.find("hardrectilinear").map_or(line, |p| &line[p + "hardrectilinear".len()..]);
                let corners = parse_corners(lineno, after)?;
                if count != 4 || corners.len() != 4 {
                    return Err(err(
                        lineno,
                        format!("`{name}` is not rectangular ({} corners)", corners.len().max(count)),
                    ));
                }
                let (x0, x1) =
                    (corners.iter().map(|c| c.0).min().unwrap_or(0), corners.iter().map(|c| c.0).max().unwrap_or(0));
                let (y0, y1) =
                    (corners.iter().map(|c| c.1).min().unwrap_or(0), corners.iter().map(|c| c.1).max().unwrap_or(0));
                let on_box = corners.iter().all(|&(x, y)| (x == x0 || x == x1) && (y == y0 || y == y1));
                let distinct = {
                    let mut c = corners.clone();
                    c.sort_unstable();
                    c.dedup();
                    c.len() == 4
                };
                if !on_box || !distinct || x1 <= x0 || y1 <= y0 {
                    return Err(err(lineno, format!("`{name}` is not an axis-aligned rectangle")));
                }
                index.insert(name.clone(), rects.len());
                rects.push(Rect::rotatable(name, x1 - x0, y1 - y0));
            }
            other => return Err(err(lineno, format!("unsupported block type `{other}`"))),
        }
    }
    stats.blocks = rects.len();
    stats.terminals = terminals.len();
    if opts.include_terminals {
        for (t, name) in terminals.iter().enumerate() {
            terminal_index.insert(name.clone(), rects.len() + t);
        }
        rects.extend(terminals.iter().map(|t| Rect::rotatable(t.clone(), 1, 1)));
    }

    let mut nets: Vec<Net<R>> = Vec::new();
    let mut declared = None;
    let mut current: Option<Vec<usize>> = None;
    let mut remaining = 0usize;
    for (k, raw) in nets_text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.trim();
        if is_skippable(line) {
            continue;
        }
        if let Some((key, value)) = header(line) {
            match key {
                "NumNets" => {
                    declared = Some(value.parse::<usize>().map_err(|_| err(lineno, "bad NumNets"))?);
                    continue;
                }
                "NumPins" => continue,
                "NetDegree" => {
                    if remaining > 0 {
                        return Err(err(lineno, format!("previous net is missing {remaining} pins")));
                    }
                    finish(current.take(), &mut nets, &mut stats);
                    let degree: usize = value
                        .split_whitespace()
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad NetDegree"))?;
                    current = Some(Vec::with_capacity(degree));
                    remaining = degree;
                    continue;
                }
                _ => {}
            }
        }
        let name = line.split_whitespace().next().unwrap_or_default();
        let Some(members) = current.as_mut() else {
            return Err(err(lineno, format!("pin `{name}` outside a net")));
        };
        if remaining == 0 {
            return Err(err(lineno, format!("net has more pins than its degree at `{name}`")));
        }
        remaining -= 1;
        stats.pins += 1;
        if let Some(&r) = index.get(name) {
            members.push(r);
        } else if let Some(&t) = terminal_index.get(name) {
            if opts.include_terminals {
                members.push(t);
            }
        } else {
            return Err(err(lineno, format!("unknown pin `{name}`")));
        }
    }
    if remaining > 0 {
        return Err(err(nets_text.lines().count(), format!("last net is missing {remaining} pins")));
    }
    finish(current.take(), &mut nets, &mut stats);
    stats.declared_nets = declared.unwrap_or(stats.parsed_nets);

    let mut inst = Instance::new(rects);
    inst.nets = nets;
    Ok((inst, stats))
}
