//! Identifier conventions shared by ontology emission and schema derivation.

/// Splits on separators and lower→upper case boundaries; `RMPData`
/// yields `RMP`, `Data`.
pub fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = chunk.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let boundary = i > 0 && c.is_uppercase() && {
                let prev = chars[i - 1];
                prev.is_lowercase()
                    || prev.is_ascii_digit()
                    || (prev.is_uppercase() && chars.get(i + 1).is_some_and(|n| n.is_lowercase()))
            };
            if boundary && !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            current.push(c);
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// `vegetable toppings` → `VegetableToppings`. Existing inner capitals are kept.
pub fn pascal_case(text: &str) -> String {
    text.split(|c: char| !c.is_alphanumeric())
        .map(capitalize)
        .collect()
}

/// `has base` → `hasBase`.
pub fn lower_camel(text: &str) -> String {
    let pascal = pascal_case(text);
    let mut chars = pascal.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// `HerbAndSpiceToppings` → `herb_and_spice_toppings`. Never empty and never
/// starts with a digit.
pub fn snake_case(text: &str) -> String {
    let joined = words(text)
        .iter()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join("_");
    if joined.is_empty() {
        "t".to_string()
    } else if joined.starts_with(|c: char| c.is_ascii_digit()) {
        format!("t_{joined}")
    } else {
        joined
    }
}

pub fn strip_plural(word: &str) -> &str {
    let keeps = word.chars().count() <= 3
        || word.ends_with("ss")
        || word.ends_with("us")
        || word.ends_with("is");
    match word.strip_suffix('s') {
        Some(stem) if !keeps => stem,
        _ => word,
    }
}

/// Lowercase words joined by `_`, with a trailing plural `s` stripped from
/// the last word. `Vegetable Toppings`, `vegetable_topping` and
/// `VegetableToppings` share the key `vegetable_topping`.
pub fn normalized_key(label: &str) -> String {
    let mut ws: Vec<String> = words(label).iter().map(|w| w.to_lowercase()).collect();
    if let Some(last) = ws.last_mut() {
        *last = strip_plural(last).to_string();
    }
    ws.join("_")
}
