//! Lossless lexical scanning of JavaScript-family test files and location of
//! `describe`/`it`/`test`/`suite`/`specify` calls.
//!
//! The tokenizer never builds a syntax tree. Every byte of the input belongs
//! to exactly one token, so concatenating token texts reproduces the source.
//! Test calls are recognized lexically: a callee identifier at an expression
//! start, an optional member chain (`.only`, `.skip`, `.each`, ...), then `(`.
//!
//! Known limitations of the lexical approach: a `/` directly after `)` is
//! always read as division (so `if (x) /re/.test(y)` mislexes), and JSX text
//! containing an unbalanced quote is reported as an unterminated string.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::annotation::{parse_docblock, AnnotationError, Docblock, ParseMode, SourceLocation};
use crate::diagnostic::Diagnostic;
use crate::Span;

pub const TEST_CALLEES: [&str; 5] = ["describe", "it", "test", "suite", "specify"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScanError {
    #[error("{file}: not valid UTF-8 (at byte {offset})")]
    EncodingError { file: PathBuf, offset: usize },
    #[error("{file}:{line}:{column}: unterminated {what}")]
    UnterminatedLiteral {
        file: PathBuf,
        line: usize,
        column: usize,
        what: &'static str,
    },
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Punctuator,
    StringLiteral,
    TemplateLiteral,
    NumberLiteral,
    LineComment,
    BlockComment,
    RegexLiteral,
    Whitespace,
    Newline,
    Other,
}

impl TokenKind {
    /// Whitespace, newlines and comments.
    pub fn is_trivia(self) -> bool {
        matches!(
            self,
            TokenKind::Whitespace | TokenKind::Newline | TokenKind::LineComment | TokenKind::BlockComment
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
}

impl Token {
    pub fn text<'s>(&self, source: &'s str) -> &'s str {
        &source[self.span.start..self.span.end]
    }
}

/// Checks UTF-8 and tokenizes.
pub fn tokenize_bytes(source: &[u8], file: &Path) -> Result<Vec<Token>, ScanError> {
    let text = std::str::from_utf8(source).map_err(|e| ScanError::EncodingError {
        file: file.to_path_buf(),
        offset: e.valid_up_to(),
    })?;
    tokenize(text, file)
}

pub fn tokenize(source: &str, file: &Path) -> Result<Vec<Token>, ScanError> {
    let mut lexer = Lexer::new(source, file);
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < source.len() {
        let (kind, end) = lexer.scan_token(pos)?;
        tokens.push(Token {
            kind,
            span: Span::new(pos, end),
            line: 0,
            column: 0,
        });
        pos = end;
    }
    assign_positions(source, &mut tokens);
    Ok(tokens)
}

fn assign_positions(source: &str, tokens: &mut [Token]) {
    let mut line = 1;
    let mut column = 1;
    let mut pos = 0;
    for token in tokens {
        // Tokens are contiguous, so advance through the previous token text.
        advance_over(&source[pos..token.span.start], &mut line, &mut column);
        token.line = line;
        token.column = column;
        advance_over(&source[token.span.start..token.span.end], &mut line, &mut column);
        pos = token.span.end;
    }
}

fn advance_over(text: &str, line: &mut usize, column: &mut usize) {
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            // `\r\n` is one line break, counted at the `\n`.
            '\r' if chars.peek() == Some(&'\n') => {}
            '\n' | '\r' | '\u{2028}' | '\u{2029}' => {
                *line += 1;
                *column = 1;
            }
            _ => *column += 1,
        }
    }
}

const REGEX_KEYWORDS: [&str; 15] = [
    "return",
    "typeof",
    "instanceof",
    "in",
    "of",
    "new",
    "delete",
    "void",
    "throw",
    "case",
    "do",
    "else",
    "yield",
    "await",
    "export",
];

/// Three-character, then two-character punctuators; anything else is one char.
const PUNCT3: [&str; 8] = ["===", "!==", "**=", "...", "<<=", ">>=", "&&=", "||="];
const PUNCT2: [&str; 19] = [
    "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "?.", "++", "--", "+=", "-=", "*=", "/=", "%=", "**", "<<", ">>",
];

struct Lexer<'s> {
    src: &'s str,
    bytes: &'s [u8],
    file: &'s Path,
    /// Whether a `/` at the current position would start a regex.
    regex_allowed: bool,
}

impl<'s> Lexer<'s> {
    fn new(src: &'s str, file: &'s Path) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            file,
            regex_allowed: true,
        }
    }

    fn unterminated(&self, start: usize, what: &'static str) -> ScanError {
        let prefix = &self.src[..start];
        let line = prefix.matches('\n').count() + 1;
        let line_start = prefix.rfind('\n').map_or(0, |i| i + 1);
        let column = self.src[line_start..start].chars().count() + 1;
        ScanError::UnterminatedLiteral {
            file: self.file.to_path_buf(),
            line,
            column,
            what,
        }
    }

    fn char_at(&self, pos: usize) -> Option<char> {
        self.src[pos..].chars().next()
    }

    /// Scans one token starting at `pos`, returning its kind and end offset,
    /// and updates the regex/division state.
    fn scan_token(&mut self, pos: usize) -> Result<(TokenKind, usize), ScanError> {
        let c = self.char_at(pos).expect("pos < len");
        let b = self.bytes[pos];
        let (kind, end) = match c {
            '\n' | '\u{2028}' | '\u{2029}' => (TokenKind::Newline, pos + c.len_utf8()),
            '\r' => {
                let end = if self.bytes.get(pos + 1) == Some(&b'\n') {
                    pos + 2
                } else {
                    pos + 1
                };
                (TokenKind::Newline, end)
            }
            c if c.is_whitespace() || c == '\u{feff}' => {
                let mut end = pos;
                while let Some(c) = self.char_at_opt(end) {
                    if (c.is_whitespace() || c == '\u{feff}') && !matches!(c, '\n' | '\r' | '\u{2028}' | '\u{2029}') {
                        end += c.len_utf8();
                    } else {
                        break;
                    }
                }
                (TokenKind::Whitespace, end)
            }
            '#' if pos == 0 && self.bytes.get(1) == Some(&b'!') => (TokenKind::LineComment, self.line_end(pos)),
            '/' if self.bytes.get(pos + 1) == Some(&b'/') => (TokenKind::LineComment, self.line_end(pos)),
            '/' if self.bytes.get(pos + 1) == Some(&b'*') => {
                let end = self.src[pos + 2..]
                    .find("*/")
                    .map(|i| pos + 2 + i + 2)
                    .ok_or_else(|| self.unterminated(pos, "block comment"))?;
                (TokenKind::BlockComment, end)
            }
            '/' if self.regex_allowed => match self.scan_regex(pos) {
                Some(end) => (TokenKind::RegexLiteral, end),
                None => (TokenKind::Punctuator, self.punct_end(pos)),
            },
            '\'' | '"' => (TokenKind::StringLiteral, self.scan_string(pos)?),
            '`' => (TokenKind::TemplateLiteral, self.scan_template(pos)?),
            c if c.is_ascii_digit() => (TokenKind::NumberLiteral, self.scan_number(pos)),
            '.' if self.bytes.get(pos + 1).is_some_and(u8::is_ascii_digit) => {
                (TokenKind::NumberLiteral, self.scan_number(pos))
            }
            c if is_ident_start(c) => (TokenKind::Identifier, self.scan_ident(pos)),
            _ if b.is_ascii_punctuation() && !matches!(b, b'#' | b'@' | b'\\') => {
                (TokenKind::Punctuator, self.punct_end(pos))
            }
            c => (TokenKind::Other, pos + c.len_utf8()),
        };
        let src = self.src;
        self.update_regex_state(kind, &src[pos..end]);
        Ok((kind, end))
    }

    fn char_at_opt(&self, pos: usize) -> Option<char> {
        if pos >= self.src.len() {
            None
        } else {
            self.char_at(pos)
        }
    }

    fn update_regex_state(&mut self, kind: TokenKind, text: &str) {
        self.regex_allowed = match kind {
            k if k.is_trivia() => return,
            TokenKind::Identifier => REGEX_KEYWORDS.contains(&text),
            TokenKind::StringLiteral
            | TokenKind::TemplateLiteral
            | TokenKind::NumberLiteral
            | TokenKind::RegexLiteral => false,
            // `}` usually ends a block statement, after which a regex may start.
            TokenKind::Punctuator => !matches!(text, ")" | "]" | "++" | "--"),
            TokenKind::Other => true,
            _ => true,
        };
    }

    fn line_end(&self, pos: usize) -> usize {
        let rest = &self.src[pos..];
        let end = rest.find(['\n', '\r', '\u{2028}', '\u{2029}']).unwrap_or(rest.len());
        pos + end
    }

    fn punct_end(&self, pos: usize) -> usize {
        let rest = &self.src[pos..];
        if PUNCT3.iter().any(|p| rest.starts_with(p)) {
            return pos + 3;
        }
        if PUNCT2.iter().any(|p| rest.starts_with(p)) {
            // `?.5` is a conditional followed by a number.
            if rest.starts_with("?.") && rest.as_bytes().get(2).is_some_and(u8::is_ascii_digit) {
                return pos + 1;
            }
            return pos + 2;
        }
        pos + 1
    }

    fn scan_ident(&self, pos: usize) -> usize {
        let mut end = pos;
        while let Some(c) = self.char_at_opt(end) {
            if is_ident_continue(c) {
                end += c.len_utf8();
            } else {
                break;
            }
        }
        end
    }

    fn scan_number(&self, pos: usize) -> usize {
        let mut end = pos;
        let mut prev = 0u8;
        while let Some(&b) = self.bytes.get(end) {
            let signed_exponent = matches!(b, b'+' | b'-') && matches!(prev, b'e' | b'E') && !self.is_hex(pos);
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || signed_exponent {
                // `1..toString()` and `1.toFixed` style member access.
                if b == b'.' && self.src[pos..end].contains('.') {
                    break;
                }
                prev = b;
                end += 1;
            } else {
                break;
            }
        }
        end
    }

    fn is_hex(&self, pos: usize) -> bool {
        let rest = &self.bytes[pos..];
        rest.len() > 1 && rest[0] == b'0' && matches!(rest[1], b'x' | b'X')
    }

    fn scan_string(&self, pos: usize) -> Result<usize, ScanError> {
        let quote = self.bytes[pos];
        let mut i = pos + 1;
        while i < self.bytes.len() {
            match self.bytes[i] {
                b'\\' => {
                    i += 1;
                    // Line continuation over CRLF.
                    if self.bytes.get(i) == Some(&b'\r') && self.bytes.get(i + 1) == Some(&b'\n') {
                        i += 2;
                    } else if i < self.bytes.len() {
                        i += self.char_at(i).map_or(1, char::len_utf8);
                    }
                }
                b'\n' | b'\r' => return Err(self.unterminated(pos, "string literal")),
                b if b == quote => return Ok(i + 1),
                _ => i += 1,
            }
        }
        Err(self.unterminated(pos, "string literal"))
    }

    /// Scans a template literal, including nested `${ ... }` expressions
    /// which may themselves contain strings, templates, comments and braces.
    fn scan_template(&mut self, pos: usize) -> Result<usize, ScanError> {
        let mut i = pos + 1;
        while i < self.bytes.len() {
            match self.bytes[i] {
                b'\\' => i += 2,
                b'`' => return Ok(i + 1),
                b'$' if self.bytes.get(i + 1) == Some(&b'{') => {
                    i = self.scan_template_expr(i + 2, pos)?;
                }
                _ => i += 1,
            }
        }
        Err(self.unterminated(pos, "template literal"))
    }

    /// Returns the offset just past the `}` closing a substitution.
    fn scan_template_expr(&mut self, mut i: usize, template_start: usize) -> Result<usize, ScanError> {
        let saved = self.regex_allowed;
        self.regex_allowed = true;
        let mut depth = 0usize;
        while i < self.bytes.len() {
            let (kind, end) = self.scan_token(i)?;
            if kind == TokenKind::Punctuator {
                match &self.src[i..end] {
                    "{" => depth += 1,
                    "}" if depth == 0 => {
                        self.regex_allowed = saved;
                        return Ok(end);
                    }
                    "}" => depth -= 1,
                    _ => {}
                }
            }
            i = end;
        }
        Err(self.unterminated(template_start, "template literal"))
    }

    /// Returns `None` when no regex terminator exists on this line, in which
    /// case the slash is lexed as a punctuator instead.
    fn scan_regex(&self, pos: usize) -> Option<usize> {
        let mut i = pos + 1;
        let mut in_class = false;
        while i < self.bytes.len() {
            match self.bytes[i] {
                b'\\' => {
                    i += 1;
                    if matches!(self.bytes.get(i), None | Some(b'\n' | b'\r')) {
                        return None;
                    }
                    i += self.char_at(i).map_or(1, char::len_utf8);
                    continue;
                }
                b'\n' | b'\r' => return None,
                b'[' => in_class = true,
                b']' => in_class = false,
                b'/' if !in_class => {
                    if i == pos + 1 {
                        return None;
                    }
                    return Some(self.scan_ident(i + 1));
                }
                _ => {}
            }
            i += 1;
        }
        None
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    is_ident_start(c) || c.is_alphanumeric() || c == '\u{200c}' || c == '\u{200d}'
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Modifier {
    None,
    Only,
    Skip,
    Each,
    /// Any other member chain, e.g. `concurrent` or `skip.if`.
    OtherMember(String),
}

impl Modifier {
    fn from_chain(members: &[&str]) -> Self {
        match members {
            [] => Modifier::None,
            ["only"] => Modifier::Only,
            ["skip"] => Modifier::Skip,
            ["each"] => Modifier::Each,
            chain if chain.contains(&"each") => Modifier::Each,
            chain => Modifier::OtherMember(chain.join(".")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestBlock {
    pub callee: String,
    pub modifier: Modifier,
    /// Span of the single member identifier when the chain has length one.
    pub modifier_span: Option<Span>,
    pub name: Option<String>,
    pub callee_span: Span,
    /// From the callee start to the matching `)`, or end of input when the
    /// call is unclosed.
    pub call_span: Span,
    pub line: usize,
    pub column: usize,
    pub docblock: Option<Docblock>,
    pub depth: usize,
    /// Index of the innermost enclosing test block.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct ScannedFile {
    pub tokens: Vec<Token>,
    pub blocks: Vec<TestBlock>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Tokenizes and locates test blocks in one step.
pub fn scan_source(source: &str, file: &Path, mode: ParseMode) -> Result<ScannedFile, ScanError> {
    let tokens = tokenize(source, file)?;
    let (blocks, diagnostics) = locate_test_blocks(source, &tokens, file, mode)?;
    Ok(ScannedFile {
        tokens,
        blocks,
        diagnostics,
    })
}

/// Finds test calls and attaches their docblocks. Errors only in strict mode,
/// when an attached docblock has a malformed tag.
pub fn locate_test_blocks(
    source: &str,
    tokens: &[Token],
    file: &Path,
    mode: ParseMode,
) -> Result<(Vec<TestBlock>, Vec<Diagnostic>), ScanError> {
    let significant: Vec<usize> = (0..tokens.len()).filter(|&i| !tokens[i].kind.is_trivia()).collect();
    let text = |i: usize| tokens[i].text(source);
    let is_punct = |i: usize, p: &str| tokens[i].kind == TokenKind::Punctuator && text(i) == p;

    let mut blocks = Vec::new();
    let mut diagnostics = Vec::new();

    for (si, &ti) in significant.iter().enumerate() {
        let token = &tokens[ti];
        if token.kind != TokenKind::Identifier || !TEST_CALLEES.contains(&text(ti)) {
            continue;
        }
        if !at_expression_start(source, tokens, &significant, si) {
            continue;
        }

        // callee ( "." ident )* "("
        let mut members = Vec::new();
        let mut member_spans = Vec::new();
        let mut cursor = si + 1;
        while cursor + 1 < significant.len()
            && is_punct(significant[cursor], ".")
            && tokens[significant[cursor + 1]].kind == TokenKind::Identifier
        {
            members.push(text(significant[cursor + 1]));
            member_spans.push(tokens[significant[cursor + 1]].span);
            cursor += 2;
        }
        let Some(&open) = significant.get(cursor) else {
            continue;
        };
        if !is_punct(open, "(") {
            continue;
        }
        // Comments between the parts of the callee are not allowed.
        if tokens[ti..open]
            .iter()
            .any(|t| matches!(t.kind, TokenKind::LineComment | TokenKind::BlockComment))
        {
            continue;
        }

        let close_end = matching_paren_end(source, tokens, &significant, cursor);
        let name = significant
            .get(cursor + 1)
            .filter(|&&i| tokens[i].kind == TokenKind::StringLiteral)
            .filter(|&&i| {
                // The first token after `(` must be the string itself.
                tokens[open + 1..i]
                    .iter()
                    .all(|t| matches!(t.kind, TokenKind::Whitespace | TokenKind::Newline))
            })
            .map(|&i| unquote(text(i)));

        let docblock = match attached_docblock(source, tokens, ti) {
            Some(di) => {
                let comment = &tokens[di];
                let mut doc = parse_docblock(comment.text(source), &SourceLocation::new(file, comment.line), mode)?;
                doc.span = comment.span;
                diagnostics.extend(doc.diagnostics.iter().cloned());
                Some(doc)
            }
            None => None,
        };

        blocks.push(TestBlock {
            callee: text(ti).to_string(),
            modifier: Modifier::from_chain(&members),
            modifier_span: (member_spans.len() == 1).then(|| member_spans[0]),
            name,
            callee_span: token.span,
            call_span: Span::new(token.span.start, close_end),
            line: token.line,
            column: token.column,
            docblock,
            depth: 0,
            parent: None,
        });
    }

    assign_nesting(&mut blocks);
    Ok((blocks, diagnostics))
}

/// Expression-start heuristic: start of input, after one of `; { } ( , =>`,
/// or after a line break that does not follow a member access dot.
fn at_expression_start(source: &str, tokens: &[Token], significant: &[usize], si: usize) -> bool {
    let Some(&prev) = si.checked_sub(1).map(|p| &significant[p]) else {
        return true;
    };
    let prev_tok = &tokens[prev];
    let prev_text = prev_tok.text(source);
    if prev_tok.kind == TokenKind::Punctuator {
        if matches!(prev_text, ";" | "{" | "}" | "(" | "," | "=>") {
            return true;
        }
        if matches!(prev_text, "." | "?.") {
            return false;
        }
    }
    let here = significant[si];
    let newline_between = tokens[prev + 1..here].iter().any(|t| t.kind == TokenKind::Newline);
    newline_between && !matches!(prev_tok.kind, TokenKind::Identifier if is_declaration_keyword(prev_text))
}

fn is_declaration_keyword(text: &str) -> bool {
    matches!(
        text,
        "function" | "const" | "let" | "var" | "class" | "async" | "get" | "set" | "static"
    )
}

fn matching_paren_end(source: &str, tokens: &[Token], significant: &[usize], open_si: usize) -> usize {
    let mut depth = 0usize;
    for &i in &significant[open_si..] {
        if tokens[i].kind != TokenKind::Punctuator {
            continue;
        }
        match tokens[i].text(source) {
            "(" => depth += 1,
            ")" => {
                depth -= 1;
                if depth == 0 {
                    return tokens[i].span.end;
                }
            }
            _ => {}
        }
    }
    source.len()
}

/// The nearest preceding `/**` comment separated from the callee only by
/// whitespace and newlines.
fn attached_docblock(source: &str, tokens: &[Token], callee: usize) -> Option<usize> {
    let mut i = callee;
    while i > 0 {
        i -= 1;
        match tokens[i].kind {
            TokenKind::Whitespace | TokenKind::Newline => continue,
            TokenKind::BlockComment => {
                let text = tokens[i].text(source);
                return (text.starts_with("/**") && text != "/**/").then_some(i);
            }
            _ => return None,
        }
    }
    None
}

fn unquote(literal: &str) -> String {
    let inner = &literal[1..literal.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('\n') | None => {}
            Some(other) => out.push(other),
        }
    }
    out
}

fn assign_nesting(blocks: &mut [TestBlock]) {
    // Blocks are in source order, so a stack of open call spans suffices.
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..blocks.len() {
        let start = blocks[i].callee_span.start;
        while let Some(&top) = stack.last() {
            if blocks[top].call_span.end <= start {
                stack.pop();
            } else {
                break;
            }
        }
        blocks[i].depth = stack.len();
        blocks[i].parent = stack.last().copied();
        stack.push(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Token> {
        tokenize(src, Path::new("t.js")).unwrap()
    }

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        toks(src)
            .into_iter()
            .filter(|t| !matches!(t.kind, TokenKind::Whitespace | TokenKind::Newline))
            .map(|t| (t.kind, t.text(src).to_string()))
            .collect()
    }

    fn blocks(src: &str) -> Vec<TestBlock> {
        scan_source(src, Path::new("t.js"), ParseMode::Lenient).unwrap().blocks
    }

    fn join(src: &str) -> String {
        toks(src).iter().map(|t| t.text(src)).collect()
    }

    #[test]
    fn simple_call_tokens() {
        let k = kinds(r#"it("a", () => {})"#);
        assert_eq!(k[0], (TokenKind::Identifier, "it".into()));
        assert_eq!(k[1], (TokenKind::Punctuator, "(".into()));
        assert_eq!(k[2], (TokenKind::StringLiteral, "\"a\"".into()));
        assert_eq!(k[6], (TokenKind::Punctuator, "=>".into()));
    }

    #[test]
    fn template_with_nested_call_is_one_token() {
        let src = "const s = `x ${ it(\"y\") } z`";
        let k = kinds(src);
        assert_eq!(k.len(), 4);
        assert_eq!(k[3].0, TokenKind::TemplateLiteral);
        assert!(blocks(src).is_empty());
    }

    #[test]
    fn nested_templates_and_braces() {
        let src = "`a ${ {b: `c ${ '}' } d`}.b } e` + it";
        let k = kinds(src);
        assert_eq!(k[0].0, TokenKind::TemplateLiteral);
        assert_eq!(k[0].1, "`a ${ {b: `c ${ '}' } d`}.b } e`");
        assert_eq!(join(src), src);
    }

    #[test]
    fn line_comment_hides_call() {
        let src = "// it(\"ghost\")";
        let k = kinds(src);
        assert_eq!(k, vec![(TokenKind::LineComment, src.to_string())]);
        assert!(blocks(src).is_empty());
    }

    #[test]
    fn regex_versus_division() {
        let k = kinds("a = b / c / d");
        assert!(k.iter().all(|(kind, _)| *kind != TokenKind::RegexLiteral));
        let k = kinds("x = /it\\(\"a\"\\)[/]/g.test(s)");
        assert_eq!(k[2], (TokenKind::RegexLiteral, "/it\\(\"a\"\\)[/]/g".into()));
        let k = kinds("return /ab+c/i");
        assert_eq!(k[1].0, TokenKind::RegexLiteral);
        let k = kinds("(a) / 2");
        assert!(k.iter().all(|(kind, _)| *kind != TokenKind::RegexLiteral));
        // A slash with no terminator on the line falls back to division.
        let k = kinds("x = a\n/ b");
        assert!(k.iter().all(|(kind, _)| *kind != TokenKind::RegexLiteral));
    }

    #[test]
    fn crlf_is_one_newline() {
        let t = toks("a\r\nb\rc\n");
        let newlines: Vec<_> = t
            .iter()
            .filter(|t| t.kind == TokenKind::Newline)
            .map(|t| t.span.len())
            .collect();
        assert_eq!(newlines, [2, 1, 1]);
        assert_eq!(t[2].line, 2);
        assert_eq!(t[4].line, 3);
    }

    #[test]
    fn unterminated_literals() {
        for (src, what, column) in [
            ("'abc", "string literal", 1),
            ("\"abc\ndef\"", "string literal", 1),
            ("`abc", "template literal", 1),
            // The innermost open literal is reported.
            ("`a ${ b `", "template literal", 9),
            ("x;\n  /* abc", "block comment", 3),
        ] {
            match tokenize(src, Path::new("t.js")) {
                Err(ScanError::UnterminatedLiteral { what: w, column: c, .. }) => {
                    assert_eq!((w, c), (what, column), "{src:?}")
                }
                other => panic!("{src:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn invalid_utf8() {
        assert!(matches!(
            tokenize_bytes(b"it('\xff')", Path::new("t.js")),
            Err(ScanError::EncodingError { offset: 4, .. })
        ));
    }

    #[test]
    fn two_docblocks_attach() {
        let src = "/** @skipOnOS win32 */\nit('should output the correct snippet ids', () => {})";
        let b = blocks(src);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].callee, "it");
        assert_eq!(b[0].modifier, Modifier::None);
        assert_eq!(b[0].name.as_deref(), Some("should output the correct snippet ids"));
        assert_eq!(b[0].docblock.as_ref().unwrap().annotations.len(), 1);
        assert_eq!(b[0].line, 2);
    }

    #[test]
    fn only_modifier() {
        let b = blocks(r#"it.only("x", () => {})"#);
        assert_eq!(b[0].modifier, Modifier::Only);
        assert_eq!(b[0].name.as_deref(), Some("x"));
        assert!(b[0].docblock.is_none());
        assert_eq!(b[0].modifier_span, Some(Span::new(3, 7)));
    }

    #[test]
    fn attachment_rules() {
        let src = "/** @skipOnOs win32 */\n\n// note\nit('x', () => {})";
        assert!(blocks(src)[0].docblock.is_none());
        let src = "/** @skipOnOs win32 */\n\n\nit('x', () => {})";
        assert!(blocks(src)[0].docblock.is_some());
        let src = "/* @skipOnOs win32 */\nit('x', () => {})";
        assert!(blocks(src)[0].docblock.is_none());
        let src = "/** @skipOnOs win32 */\nconst y = 1;\nit('x', () => {})";
        assert!(blocks(src)[0].docblock.is_none());
    }

    #[test]
    fn not_test_calls() {
        for src in [
            "foo.it('x')",
            "function test(a) {}",
            "const it = 1",
            "obj.describe('x')",
            "x = test",
            "describe\n.only",
            "a?.test('x')",
        ] {
            assert!(blocks(src).is_empty(), "{src:?}");
        }
    }

    #[test]
    fn modifiers_and_chains() {
        let b = blocks("describe.each([[1]])('n %i', (n) => {});\ntest.concurrent('c', f);\nit.skip('s', f)");
        assert_eq!(b[0].modifier, Modifier::Each);
        assert_eq!(b[0].name, None);
        assert_eq!(b[1].modifier, Modifier::OtherMember("concurrent".into()));
        assert_eq!(b[2].modifier, Modifier::Skip);
        let b = blocks("test.concurrent.each([1])('x', f)");
        assert_eq!(b[0].modifier, Modifier::Each);
        assert_eq!(b[0].modifier_span, None);
    }

    #[test]
    fn nesting_depth() {
        let src = "describe('outer', () => {\n  it('a', () => {});\n  describe('inner', function () {\n    test('b', () => {})\n  })\n})\nit('top', f)";
        let b = blocks(src);
        let depths: Vec<_> = b.iter().map(|b| (b.name.clone().unwrap(), b.depth, b.parent)).collect();
        assert_eq!(
            depths,
            vec![
                ("outer".into(), 0, None),
                ("a".into(), 1, Some(0)),
                ("inner".into(), 1, Some(0)),
                ("b".into(), 2, Some(2)),
                ("top".into(), 0, None),
            ]
        );
    }

    #[test]
    fn after_statement_without_semicolon() {
        let b = blocks("foo()\nit('x', f)\nconst a = b\ntest('y', f)");
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn name_needs_plain_string() {
        assert_eq!(blocks("it(`tmpl`, f)")[0].name, None);
        assert_eq!(blocks("it(name, f)")[0].name, None);
        assert_eq!(blocks("it('it\\'s', f)")[0].name.as_deref(), Some("it's"));
    }

    #[test]
    fn hashbang_and_bom() {
        let src = "\u{feff}#!/usr/bin/env node\nit('x', f)";
        assert_eq!(join(src), src);
        // The hashbang is only a comment at offset 0; after a BOM it is `#`.
        assert_eq!(blocks(src).len(), 1);
    }
}
