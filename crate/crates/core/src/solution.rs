//! Solver status and the JSON solution file.

use std::fmt;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::numeric::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Certificate {
    pub method: String,
    pub piece_index: Option<usize>,
    pub cell_sign_vector: Option<String>,
    pub bases: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub lp_solves: usize,
    pub cells: usize,
    pub pieces: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionFile {
    pub status: SolveStatus,
    pub value: Option<Rational>,
    pub x: Vec<Rational>,
    pub y_witness: Option<Vec<Rational>>,
    pub certificate: Option<Certificate>,
    pub stats: SolveStats,
}

fn rat(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn rats(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rat).collect())
}

impl SolutionFile {
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("status".into(), json!(self.status.as_str()));
        obj.insert("value".into(), self.value.as_ref().map_or(Value::Null, rat));
        obj.insert("x".into(), rats(&self.x));
        if let Some(y) = &self.y_witness {
            obj.insert("y_witness".into(), rats(y));
        }
        if let Some(c) = &self.certificate {
            obj.insert(
                "certificate".into(),
                json!({
                    "method": c.method,
                    "piece_index": c.piece_index,
                    "cell_sign_vector": c.cell_sign_vector,
                    "bases": c.bases,
                }),
            );
        }
        obj.insert(
            "stats".into(),
            json!({
                "lp_solves": self.stats.lp_solves,
                "cells": self.stats.cells,
                "pieces": self.stats.pieces,
            }),
        );
        Value::Object(obj)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(&self.to_json()).expect("json values serialize");
        out.push(b'\n');
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<SolutionFile> {
        let root: Value = serde_json::from_slice(bytes)
            .map_err(|e| Error::parse(format!("line {}", e.line()), e.to_string()))?;
        let status = match root.get("status").and_then(Value::as_str) {
            Some("optimal") => SolveStatus::Optimal,
            Some("infeasible") => SolveStatus::Infeasible,
            _ => {
                return Err(Error::parse(
                    "status",
                    "expected \"optimal\" or \"infeasible\"",
                ))
            }
        };
        let value = match root.get("value") {
            None | Some(Value::Null) => None,
            Some(v) => Some(rational_field(v, "value")?),
        };
        let x = rational_array(root.get("x"), "x")?;
        let y_witness = match root.get("y_witness") {
            None | Some(Value::Null) => None,
            v => Some(rational_array(v, "y_witness")?),
        };
        let certificate = match root.get("certificate") {
            None | Some(Value::Null) => None,
            Some(c) => Some(Certificate {
                method: c
                    .get("method")
                    .and_then(Value::as_str)
                    .unwrap_or_default()
                    .to_string(),
                piece_index: c
                    .get("piece_index")
                    .and_then(Value::as_u64)
                    .map(|v| v as usize),
                cell_sign_vector: c
                    .get("cell_sign_vector")
                    .and_then(Value::as_str)
                    .map(str::to_string),
                bases: c
                    .get("bases")
                    .and_then(Value::as_array)
                    .map(|bs| {
                        bs.iter()
                            .map(|b| {
                                b.as_array()
                                    .map(|ix| {
                                        ix.iter()
                                            .filter_map(Value::as_u64)
                                            .map(|v| v as usize)
                                            .collect()
                                    })
                                    .unwrap_or_default()
                            })
                            .collect()
                    })
                    .unwrap_or_default(),
            }),
        };
        let stat = |k: &str| {
            root.get("stats")
                .and_then(|s| s.get(k))
                .and_then(Value::as_u64)
                .unwrap_or(0) as usize
        };
        Ok(SolutionFile {
            status,
            value,
            x,
            y_witness,
            certificate,
            stats: SolveStats {
                lp_solves: stat("lp_solves"),
                cells: stat("cells"),
                pieces: stat("pieces"),
            },
        })
    }
}

fn rational_field(v: &Value, location: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s)
            .map_err(|_| Error::parse(location, format!("{s:?} is not a rational literal"))),
        Value::Number(n) => n
            .as_i64()
            .map(crate::numeric::int)
            .ok_or_else(|| Error::parse(location, format!("{n} is not an integer"))),
        other => Err(Error::parse(
            location,
            format!("expected a rational, found {other}"),
        )),
    }
}

fn rational_array(v: Option<&Value>, location: &str) -> Result<Vec<Rational>> {
    v.and_then(Value::as_array)
        .ok_or_else(|| Error::parse(location, "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, e)| rational_field(e, &format!("{location}[{i}]")))
        .collect()
}
