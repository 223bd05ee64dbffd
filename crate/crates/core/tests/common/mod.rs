#![allow(dead_code)]

use modlog::engine::{Engine, Flags};

pub const LIBRARY: &str = include_str!("../corpus/library.pl");
pub const CLIENT_V1: &str = include_str!("../corpus/client_v1.pl");
pub const CLIENT_V2: &str = include_str!("../corpus/client_v2.pl");
pub const CLIENT_V3: &str = include_str!("../corpus/client_v3.pl");
pub const FICTITIOUS: &str = include_str!("../corpus/fictitious.pl");
pub const STRIP_M: &str = include_str!("../corpus/strip_m.pl");
pub const PATTERN_M: &str = include_str!("../corpus/pattern_m.pl");
pub const TOOL_M: &str = include_str!("../corpus/tool_m.pl");
pub const TRANSPARENT: &str = include_str!("../corpus/transparent.pl");

pub fn engine(sources: &[(&str, &str)], flags: Flags) -> Engine {
    Engine::from_sources(sources.iter().copied(), flags, false).expect("corpus loads").0
}

/// Answer lines of every solution, sorted, for multiset comparison.
pub fn answers(engine: &mut Engine, goal: &str) -> Result<Vec<String>, String> {
    let mut out: Vec<String> = engine.solve_all(goal).map_err(|e| e.to_string())?.iter().map(|s| s.lines().join(", ")).collect();
    out.sort();
    Ok(out)
}

/// Replaces `_<digits>` with `_N`.
pub fn wildcard(text: &str) -> String {
    let mut out = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        out.push(c);
        if c == '_' && chars.peek().is_some_and(|d| d.is_ascii_digit()) {
            while chars.peek().is_some_and(|d| d.is_ascii_digit()) {
                chars.next();
            }
            out.push('N');
        }
    }
    out
}
