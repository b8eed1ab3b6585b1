//! Parsers for LLM responses. Total: no input can fail, bad lines are dropped.

/// Extracts queries from lines of the form `query: <text>`.
///
/// The prefix match is case-insensitive and tolerates leading whitespace;
/// empty remainders and non-matching lines are dropped; order is preserved;
/// the result is capped at `max_queries`.
pub fn parse_query_response(text: &str, max_queries: usize) -> Vec<String> {
    text.lines()
        .filter_map(|line| strip_tag(line, "query:"))
        .take(max_queries)
        .collect()
}

/// Extracts the first `title: <text>` line, if any.
pub fn parse_title_response(text: &str) -> Option<String> {
    text.lines().find_map(|line| strip_tag(line, "title:"))
}

fn strip_tag(line: &str, tag: &str) -> Option<String> {
    let trimmed = line.trim_start();
    // get() keeps this total: a multi-byte char straddling the boundary is a non-match.
    let head = trimmed.get(..tag.len())?;
    if !head.eq_ignore_ascii_case(tag) {
        return None;
    }
    let rest = trimmed[tag.len()..].trim();
    (!rest.is_empty()).then(|| rest.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_well_formed_queries() {
        let out = parse_query_response("query: what is X?\nquery: how does Y work?", 10);
        assert_eq!(out, vec!["what is X?", "how does Y work?"]);
    }

    #[test]
    fn drops_noise_and_empty_remainders() {
        let out = parse_query_response("Here are queries:\nquery: a\n\nnoise\nquery:   ", 10);
        assert_eq!(out, vec!["a"]);
    }

    #[test]
    fn empty_input_is_empty_output() {
        assert!(parse_query_response("", 10).is_empty());
        assert_eq!(parse_title_response(""), None);
    }

    #[test]
    fn cap_applies_after_filtering() {
        let out = parse_query_response("query: a\nquery: b\nquery: c", 2);
        assert_eq!(out, vec!["a", "b"]);
    }

    #[test]
    fn prefix_is_case_insensitive_with_leading_whitespace() {
        let out = parse_query_response("  QUERY: shouted\n\tQuery: tabbed", 10);
        assert_eq!(out, vec!["shouted", "tabbed"]);
        assert_eq!(parse_title_response("Title:  A  "), Some("A".into()));
    }

    #[test]
    fn title_takes_first_match_only() {
        let t = parse_title_response("preamble\ntitle: George Washington\ntitle: other");
        assert_eq!(t, Some("George Washington".into()));
        assert_eq!(parse_title_response("no prefix here"), None);
    }

    #[test]
    fn parsers_are_total_on_weird_input() {
        for s in ["query:", "query:\u{00a0}", "\u{7f}title:x", "query:Ω k"] {
            let _ = parse_query_response(s, 4);
            let _ = parse_title_response(s);
        }
        // multi-byte content after the tag survives intact
        assert_eq!(parse_query_response("query: Ωmega", 4), vec!["Ωmega"]);
    }
}
