//! Event expressions and subset lists on the command line.
//!
//! An event is a conjunction, joined by `&`, of per-component predicates:
//! `name=value`, `name!=value`, `name in {a, b}`, and ordinal comparisons
//! `<`, `<=`, `>`, `>=` in outcome order. `true` is the sure event.

use crate::error::{Error, Result};
use crate::measure::{Event, FiniteProductSpace, SubsetMask};

const OPERATORS: [&str; 7] = ["!=", "<=", ">=", "==", "=", "<", ">"];

fn component(space: &FiniteProductSpace, name: &str) -> Result<usize> {
    space
        .index_of(name)
        .ok_or_else(|| Error::Parse(format!("unknown component {name:?}")))
}

fn outcome(space: &FiniteProductSpace, t: usize, label: &str) -> Result<usize> {
    let c = space.component(t);
    c.outcomes
        .iter()
        .position(|o| o == label)
        .ok_or_else(|| Error::Parse(format!("component {:?} has no outcome {label:?}", c.name)))
}

fn predicate(space: &FiniteProductSpace, text: &str) -> Result<(usize, Vec<bool>)> {
    let text = text.trim();
    if let Some((lhs, rhs)) = text.split_once(" in ") {
        let t = component(space, lhs.trim())?;
        let body = rhs
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("expected `{{..}}` after `in` in {text:?}")))?;
        let mut allowed = vec![false; space.sizes()[t]];
        for label in body.split(',').map(str::trim).filter(|l| !l.is_empty()) {
            allowed[outcome(space, t, label)?] = true;
        }
        return Ok((t, allowed));
    }
    for op in OPERATORS {
        if let Some((lhs, rhs)) = text.split_once(op) {
            let t = component(space, lhs.trim())?;
            let v = outcome(space, t, rhs.trim())?;
            let allowed = (0..space.sizes()[t])
                .map(|i| match op {
                    "=" | "==" => i == v,
                    "!=" => i != v,
                    "<" => i < v,
                    "<=" => i <= v,
                    ">" => i > v,
                    _ => i >= v,
                })
                .collect();
            return Ok((t, allowed));
        }
    }
    Err(Error::Parse(format!("cannot parse predicate {text:?}")))
}

/// Parses a conjunction of predicates into a measurable rectangle.
pub fn parse_event(space: &std::sync::Arc<FiniteProductSpace>, text: &str) -> Result<Event> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty event expression".into()));
    }
    if text == "true" {
        return Ok(Event::full(space.clone()));
    }
    let mut sides: Vec<Option<Vec<bool>>> = vec![None; space.n()];
    for part in text.split('&') {
        let (t, allowed) = predicate(space, part)?;
        sides[t] = Some(match sides[t].take() {
            Some(prev) => prev.iter().zip(&allowed).map(|(a, b)| *a && *b).collect(),
            None => allowed,
        });
    }
    let sides: Vec<Option<Vec<usize>>> = sides
        .into_iter()
        .map(|s| s.map(|flags| flags.iter().enumerate().filter(|(_, f)| **f).map(|(i, _)| i).collect()))
        .collect();
    Event::rectangle(space.clone(), &sides)
}

/// Parses `[0,2]`, `0,2`, `X,Y` or `[]`; entries are indices or component names.
pub fn parse_subset(space: &FiniteProductSpace, text: &str) -> Result<SubsetMask> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']').trim();
    let mut mask = SubsetMask::EMPTY;
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let t = match part.parse::<usize>() {
            Ok(t) if space.index_of(part).is_none() => t,
            _ => component(space, part)?,
        };
        if t >= space.n() {
            return Err(Error::Parse(format!("component index {t} out of range (n = {})", space.n())));
        }
        mask = mask.union(SubsetMask::singleton(t));
    }
    Ok(mask)
}

/// Parses comma-separated weights, with or without brackets.
pub fn parse_weights(text: &str) -> Result<Vec<f64>> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| Error::Parse(format!("bad weight {p:?}"))))
        .collect()
}
