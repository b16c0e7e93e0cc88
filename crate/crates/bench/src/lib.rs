//! Benchmark inputs.

pub const COMBINATORS: &str = include_str!("../../cli/corpus/combinators.elv");
pub const MAP_FUSION_APPLIED: &str = include_str!("../../cli/corpus/map_fusion_applied.elv");
pub const ST_RULES: &str = include_str!("../../cli/corpus/st_rules.elv");

/// `n` copies of mapFusion chained with `seq`, so the argument type nests `n + 1` maps.
pub fn fusion_chain(n: usize) -> String {
    let mut src = String::from(COMBINATORS);
    let fusion = MAP_FUSION_APPLIED.split("\n-- map g").next().unwrap_or_default();
    let body = fusion.split("let mapFusion").nth(1).unwrap_or_default();
    src.push_str(&format!("\nlet mapFusion{body}\n"));
    src.push_str("let chain0 = mapFusion\n");
    for i in 1..n {
        src.push_str(&format!("let chain{i} = seq mapFusion chain{}\n", i - 1));
    }
    src
}

/// A match over `n` distinct labels followed by a catch-all.
pub fn wide_match(n: usize) -> String {
    let arms: Vec<String> = (0..n).map(|i| format!("L{i} x{i} => x{i}")).collect();
    format!(
        "let pick = lam v = match v with <\n    {}\n  | other => Other\n  >\n",
        arms.join("\n  | ")
    )
}
