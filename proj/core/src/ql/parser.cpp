#include "ssf/ql/parser.hpp"

#include <cctype>
#include <set>

#include "ssf/rdf/vocab.hpp"

namespace ssf::ql {

using rdf::Iri;
using rdf::ParseError;
using rdf::Term;

namespace {

struct Token {
  enum class Kind {
    Ident,      // bare name: keywords, builtin names, 'a'
    PName,      // prefix:local
    IriRef,     // <...>, content unexpanded
    Var,        // ?name
    String,     // single-quoted
    Integer,
    Decimal,
    TripleString,  // """..."""
    LBrace, RBrace,
    LParen, RParen,
    LBracket, RBracket,
    Semi, Dot, Comma, At,
    QtOpen, QtClose,
    AndAnd,
    Lt, Gt, Le, Ge, Eq,
    Plus, Minus,
    PrefixDecl,
    End,
  };
  Kind kind = Kind::End;
  std::string text;
  std::string prefix;
  int line = 1;
  int col = 1;
};

bool iri_char(char c) {
  return c != '\0' && c != '>' && c != '<' && c != '{' && c != '}' && c != '?' && c != '&' &&
         c != '(' && c != ')' && c != ',' && !std::isspace(static_cast<unsigned char>(c));
}

class QlLexer {
 public:
  QlLexer(std::string_view text, int line_offset) : text_(text), line_(1 + line_offset) {}

  Token next() {
    skip_trivia();
    Token tok;
    tok.line = line_;
    tok.col = col_;
    if (eof()) return tok;
    char c = peek();
    switch (c) {
      case '{': advance(); tok.kind = Token::Kind::LBrace; return tok;
      case '}': advance(); tok.kind = Token::Kind::RBrace; return tok;
      case '(': advance(); tok.kind = Token::Kind::LParen; return tok;
      case ')': advance(); tok.kind = Token::Kind::RParen; return tok;
      case '[': advance(); tok.kind = Token::Kind::LBracket; return tok;
      case ']': advance(); tok.kind = Token::Kind::RBracket; return tok;
      case ';': advance(); tok.kind = Token::Kind::Semi; return tok;
      case '.': advance(); tok.kind = Token::Kind::Dot; return tok;
      case ',': advance(); tok.kind = Token::Kind::Comma; return tok;
      case '+': advance(); tok.kind = Token::Kind::Plus; return tok;
      case '-': advance(); tok.kind = Token::Kind::Minus; return tok;
      case '=': advance(); tok.kind = Token::Kind::Eq; return tok;
      default: break;
    }
    if (c == '&' && peek(1) == '&') {
      advance(); advance();
      tok.kind = Token::Kind::AndAnd;
      return tok;
    }
    if (c == '@') return lex_at(tok);
    if (c == '?') return lex_var(tok);
    if (c == '\'') return lex_string(tok);
    if (c == '"' && peek(1) == '"' && peek(2) == '"') return lex_triple_string(tok);
    if (c == '>') {
      advance();
      if (peek() == '>') {
        advance();
        tok.kind = Token::Kind::QtClose;
      } else if (peek() == '=') {
        advance();
        tok.kind = Token::Kind::Ge;
      } else {
        tok.kind = Token::Kind::Gt;
      }
      return tok;
    }
    if (c == '<') return lex_angle(tok);
    if (std::isdigit(static_cast<unsigned char>(c))) return lex_number(tok);
    if (c == ':' || c == '_' || std::isalpha(static_cast<unsigned char>(c))) return lex_name(tok);
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

 private:
  bool eof(std::size_t ahead = 0) const { return pos_ + ahead >= text_.size(); }
  char peek(std::size_t ahead = 0) const { return eof(ahead) ? '\0' : text_[pos_ + ahead]; }

  void advance() {
    if (eof()) return;
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (!eof()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#' || (c == '/' && peek(1) == '/')) {
        while (!eof() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token& lex_at(Token& tok) {
    // '@prefix' directive vs the '@ ?T' timestamp marker
    if (text_.compare(pos_ + 1, 6, "prefix") == 0) {
      for (int i = 0; i < 7; ++i) advance();
      tok.kind = Token::Kind::PrefixDecl;
      return tok;
    }
    advance();
    tok.kind = Token::Kind::At;
    return tok;
  }

  Token& lex_var(Token& tok) {
    advance();  // ?
    std::string name;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      name += peek();
      advance();
    }
    if (name.empty()) throw ParseError("empty variable name", tok.line, tok.col);
    tok.kind = Token::Kind::Var;
    tok.text = std::move(name);
    return tok;
  }

  Token& lex_string(Token& tok) {
    advance();
    std::string value;
    while (true) {
      if (eof()) throw ParseError("unterminated string literal", tok.line, tok.col);
      char c = peek();
      if (c == '\'') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        char esc = peek();
        switch (esc) {
          case '\'': value += '\''; break;
          case '\\': value += '\\'; break;
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          default: throw ParseError("unknown escape", line_, col_);
        }
        advance();
        continue;
      }
      value += c;
      advance();
    }
    tok.kind = Token::Kind::String;
    tok.text = std::move(value);
    return tok;
  }

  Token& lex_triple_string(Token& tok) {
    advance(); advance(); advance();
    std::string value;
    while (true) {
      if (eof()) throw ParseError("unterminated \"\"\" string", tok.line, tok.col);
      if (peek() == '"' && peek(1) == '"' && peek(2) == '"') {
        advance(); advance(); advance();
        break;
      }
      value += peek();
      advance();
    }
    tok.kind = Token::Kind::TripleString;
    tok.text = std::move(value);
    return tok;
  }

  Token& lex_angle(Token& tok) {
    // '<' opens a quoted triple, an IRI, or is the less-than operator.
    if (peek(1) == '<') {
      advance(); advance();
      tok.kind = Token::Kind::QtOpen;
      return tok;
    }
    if (peek(1) == '=') {
      advance(); advance();
      tok.kind = Token::Kind::Le;
      return tok;
    }
    // Probe for '...>' made of IRI characters.
    std::size_t i = pos_ + 1;
    std::string body;
    while (i < text_.size() && iri_char(text_[i])) {
      body += text_[i];
      ++i;
    }
    if (!body.empty() && i < text_.size() && text_[i] == '>') {
      while (pos_ <= i) advance();  // consume through the single '>'
      tok.kind = Token::Kind::IriRef;
      tok.text = std::move(body);
      return tok;
    }
    advance();
    tok.kind = Token::Kind::Lt;
    return tok;
  }

  Token& lex_number(Token& tok) {
    std::string lexical;
    bool decimal = false;
    while (!eof()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        lexical += c;
        advance();
      } else if (c == '.' && !decimal && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        decimal = true;
        lexical += c;
        advance();
      } else {
        break;
      }
    }
    tok.kind = decimal ? Token::Kind::Decimal : Token::Kind::Integer;
    tok.text = std::move(lexical);
    return tok;
  }

  Token& lex_name(Token& tok) {
    std::string prefix;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '-')) {
      prefix += peek();
      advance();
    }
    if (peek() == ':') {
      advance();
      std::string local;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                        peek() == '-')) {
        local += peek();
        advance();
      }
      tok.kind = Token::Kind::PName;
      tok.prefix = std::move(prefix);
      tok.text = std::move(local);
      return tok;
    }
    if (prefix.empty()) throw ParseError("stray ':'", tok.line, tok.col);
    tok.kind = Token::Kind::Ident;
    tok.text = std::move(prefix);
    return tok;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
  int col_ = 1;
};

class QueryParser {
 public:
  QueryParser(std::string_view text, Iri rule_id, const ParseOptions& options, int line_offset)
      : lexer_(text, line_offset), options_(options) {
    rule_.id = std::move(rule_id);
    rule_.kind = rule_.id.value.find(options.soft_rule_id_pattern) != std::string::npos
                     ? RuleKind::Soft
                     : RuleKind::Hard;
    consume();
  }

  Rule parse() {
    expect_keyword("CONSTRUCT");
    expect(Token::Kind::LBrace, "'{'");
    while (cur_.kind != Token::Kind::RBrace) emit_pattern(rule_.head);
    consume();  // }
    expect_keyword("WHERE");
    expect(Token::Kind::LBrace, "'{'");
    while (cur_.kind != Token::Kind::RBrace) parse_where_item();
    consume();  // }
    if (cur_.kind != Token::Kind::End) fail("trailing input after query");
    validate();
    return std::move(rule_);
  }

 private:
  void consume() { cur_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur_.line, cur_.col);
  }

  void expect(Token::Kind kind, const char* what) {
    if (cur_.kind != kind) fail(std::string("expected ") + what);
    consume();
  }

  bool at_keyword(const char* kw) const {
    return cur_.kind == Token::Kind::Ident && cur_.text == kw;
  }

  void expect_keyword(const char* kw) {
    if (!at_keyword(kw)) fail(std::string("expected ") + kw);
    consume();
  }

  Term expand_iriref(const Token& tok) const {
    auto colon = tok.text.find(':');
    if (colon != std::string::npos) {
      std::string prefix = tok.text.substr(0, colon);
      if (options_.prefixes.has(prefix))
        return Term::iri(options_.prefixes.expand(prefix, tok.text.substr(colon + 1)));
    }
    return Term::iri(tok.text);
  }

  Term expand_pname(const Token& tok) const {
    if (!options_.prefixes.has(tok.prefix))
      throw ParseError("unknown prefix: '" + tok.prefix + ":'", tok.line, tok.col);
    return Term::iri(options_.prefixes.expand(tok.prefix, tok.text));
  }

  TermOrVar parse_term_or_var(bool allow_literal) {
    switch (cur_.kind) {
      case Token::Kind::Var: {
        Variable v{cur_.text};
        consume();
        return v;
      }
      case Token::Kind::PName: {
        Term t = expand_pname(cur_);
        consume();
        return t;
      }
      case Token::Kind::IriRef: {
        Term t = expand_iriref(cur_);
        consume();
        return t;
      }
      case Token::Kind::String: {
        if (!allow_literal) fail("literal not allowed here");
        Term t = Term::literal(cur_.text);
        consume();
        return t;
      }
      case Token::Kind::Integer: {
        if (!allow_literal) fail("literal not allowed here");
        Term t = Term::literal(cur_.text, rdf::xsd::kInteger);
        consume();
        return t;
      }
      case Token::Kind::Decimal: {
        if (!allow_literal) fail("literal not allowed here");
        Term t = Term::literal(cur_.text, rdf::xsd::kDecimal);
        consume();
        return t;
      }
      case Token::Kind::QtOpen:
        fail("nested quoted pattern not supported");
      default:
        fail("expected term or variable");
    }
  }

  TermOrVar parse_verb() {
    if (at_keyword("a")) {
      consume();
      return Term::iri(rdf::kRdfType);
    }
    if (cur_.kind == Token::Kind::Var) {
      Variable v{cur_.text};
      consume();
      return v;
    }
    if (cur_.kind == Token::Kind::PName) {
      Term t = expand_pname(cur_);
      consume();
      return t;
    }
    if (cur_.kind == Token::Kind::IriRef) {
      Term t = expand_iriref(cur_);
      consume();
      return t;
    }
    fail("expected predicate");
  }

  std::optional<Variable> parse_ts_var() {
    if (cur_.kind != Token::Kind::At) return std::nullopt;
    consume();
    if (cur_.kind != Token::Kind::Var) fail("expected variable after '@'");
    Variable v{cur_.text};
    consume();
    return v;
  }

  PatternStmt parse_pattern_stmt() {
    if (cur_.kind == Token::Kind::QtOpen) {
      consume();
      QtStatement stmt;
      stmt.qt.subject = parse_term_or_var(false);
      stmt.qt.predicate = parse_verb();
      stmt.qt.object = parse_term_or_var(true);
      // The listings write `<ssr:FoV>>`: the IRI eats one '>', leaving a
      // bare '>' to close the quoted pattern. Accept both forms.
      if (cur_.kind == Token::Kind::QtClose || cur_.kind == Token::Kind::Gt) {
        consume();
      } else {
        fail("expected '>>'");
      }
      stmt.ts_var = parse_ts_var();
      // Annotations follow directly (`<<...>> :score ?S`) or ';'-separated
      // (`<<...>> @ ?T; :score ?S`).
      bool expect_annotation = cur_.kind == Token::Kind::PName ||
                               cur_.kind == Token::Kind::IriRef ||
                               cur_.kind == Token::Kind::Var || at_keyword("a");
      while (expect_annotation || cur_.kind == Token::Kind::Semi) {
        if (cur_.kind == Token::Kind::Semi) {
          consume();
          if (cur_.kind == Token::Kind::Dot) break;
        }
        PredObj po;
        po.predicate = parse_verb();
        po.object = parse_term_or_var(true);
        stmt.annotations.push_back(std::move(po));
        expect_annotation = false;
      }
      expect(Token::Kind::Dot, "'.'");
      return stmt;
    }

    // Plain statement; ';' predicate lists expand to one pattern per verb.
    TermOrVar subject = parse_term_or_var(false);
    std::vector<PlainPattern> expanded;
    while (true) {
      PlainPattern p;
      p.subject = subject;
      p.predicate = parse_verb();
      p.object = parse_term_or_var(true);
      p.ts_var = parse_ts_var();
      expanded.push_back(std::move(p));
      if (cur_.kind == Token::Kind::Semi) {
        consume();
        if (cur_.kind == Token::Kind::Dot) break;
        continue;
      }
      break;
    }
    // A '.' terminates the statement; tolerate its absence before '}' so a
    // single-pattern block like `{ ?Trk2 :trk ?B2 }` parses as written.
    if (cur_.kind == Token::Kind::Dot) {
      consume();
    } else if (cur_.kind != Token::Kind::RBrace) {
      fail("expected '.'");
    }
    if (expanded.size() == 1) return expanded[0];
    pending_ = std::vector<PlainPattern>(expanded.begin() + 1, expanded.end());
    return expanded[0];
  }

  // Pattern statements may expand to several patterns (predicate lists);
  // drain the overflow into the given sink.
  void emit_pattern(std::vector<PatternStmt>& sink) {
    sink.push_back(parse_pattern_stmt());
    for (auto& p : pending_) sink.push_back(p);
    pending_.clear();
  }

  WindowSpec parse_window() {
    WindowSpec w;
    if (!at_keyword("window")) return w;
    consume();
    expect(Token::Kind::LBracket, "'['");
    if (cur_.kind != Token::Kind::Integer) fail("expected window length");
    w.kind = WindowSpec::Kind::Range;
    w.seconds = std::stoi(cur_.text);
    if (w.seconds < 1) fail("window length must be >= 1");
    consume();
    expect_keyword("sec");
    expect(Token::Kind::RBracket, "']'");
    return w;
  }

  StreamBlock parse_stream_block() {
    expect_keyword("STREAM");
    if (cur_.kind != Token::Kind::IriRef) fail("expected stream IRI");
    StreamBlock block;
    block.stream = rdf::StreamId{expand_iriref(cur_).as_iri()};
    consume();
    block.block_ts_var = parse_ts_var();
    block.window = parse_window();
    if (!block.block_ts_var) block.block_ts_var = parse_ts_var();
    expect(Token::Kind::LBrace, "'{'");
    while (cur_.kind != Token::Kind::RBrace) {
      if (at_keyword("FILTER")) {
        consume();
        block.filters.push_back(parse_filter_arg());
      } else {
        emit_pattern(block.patterns);
      }
    }
    consume();  // }
    if (block.patterns.empty()) fail("empty stream block");
    return block;
  }

  void parse_where_item() {
    if (at_keyword("STREAM")) {
      rule_.body.positive.push_back(parse_stream_block());
      return;
    }
    if (at_keyword("NAF")) {
      consume();
      rule_.body.naf.push_back(parse_stream_block());
      return;
    }
    if (at_keyword("FILTER")) {
      consume();
      rule_.body.filters.push_back(parse_filter_arg());
      return;
    }
    // Static pattern(s) against the background graph.
    std::vector<PatternStmt> stmts;
    emit_pattern(stmts);
    for (PatternStmt& s : stmts) {
      if (!std::holds_alternative<PlainPattern>(s))
        fail("quoted patterns require a stream block");
      PlainPattern& p = std::get<PlainPattern>(s);
      if (p.ts_var) fail("static patterns carry no timestamp");
      rule_.body.static_patterns.push_back(std::move(p));
    }
  }

  FilterPtr parse_filter_arg() {
    // Both FILTER (...) and FILTER {...} appear in the wild.
    Token::Kind close;
    if (cur_.kind == Token::Kind::LParen) {
      close = Token::Kind::RParen;
    } else if (cur_.kind == Token::Kind::LBrace) {
      close = Token::Kind::RBrace;
    } else {
      fail("expected '(' or '{' after FILTER");
    }
    consume();
    FilterPtr expr = parse_expr();
    if (cur_.kind != close) fail("unterminated FILTER");
    consume();
    return expr;
  }

  FilterPtr parse_expr() {
    FilterPtr lhs = parse_comparison();
    while (cur_.kind == Token::Kind::AndAnd) {
      consume();
      FilterPtr rhs = parse_comparison();
      lhs = FilterExpr::make_binary(FilterExpr::Op::And, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FilterPtr parse_comparison() {
    FilterPtr lhs = parse_additive();
    FilterExpr::Op op;
    switch (cur_.kind) {
      case Token::Kind::Lt: op = FilterExpr::Op::Lt; break;
      case Token::Kind::Gt: op = FilterExpr::Op::Gt; break;
      case Token::Kind::Le: op = FilterExpr::Op::Le; break;
      case Token::Kind::Ge: op = FilterExpr::Op::Ge; break;
      case Token::Kind::Eq: op = FilterExpr::Op::Eq; break;
      default: return lhs;
    }
    consume();
    FilterPtr rhs = parse_additive();
    return FilterExpr::make_binary(op, std::move(lhs), std::move(rhs));
  }

  FilterPtr parse_additive() {
    FilterPtr lhs = parse_primary();
    while (cur_.kind == Token::Kind::Plus || cur_.kind == Token::Kind::Minus) {
      FilterExpr::Op op =
          cur_.kind == Token::Kind::Plus ? FilterExpr::Op::Add : FilterExpr::Op::Sub;
      consume();
      FilterPtr rhs = parse_primary();
      lhs = FilterExpr::make_binary(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FilterPtr parse_primary() {
    if (cur_.kind == Token::Kind::LParen) {
      consume();
      FilterPtr e = parse_expr();
      expect(Token::Kind::RParen, "')'");
      return e;
    }
    if (cur_.kind == Token::Kind::Var) {
      Variable v{cur_.text};
      consume();
      return FilterExpr::make_var(std::move(v));
    }
    if (cur_.kind == Token::Kind::Integer || cur_.kind == Token::Kind::Decimal) {
      double value = std::stod(cur_.text);
      std::string lexical = cur_.text;
      consume();
      return FilterExpr::make_num(value, std::move(lexical));
    }
    if (cur_.kind == Token::Kind::Ident) {
      std::string name = cur_.text;
      if (name != "iou") fail("unknown builtin name '" + name + "'");
      consume();
      expect(Token::Kind::LParen, "'('");
      if (cur_.kind != Token::Kind::Var) fail("iou expects a variable");
      Variable a{cur_.text};
      consume();
      expect(Token::Kind::Comma, "','");
      if (cur_.kind != Token::Kind::Var) fail("iou expects a variable");
      Variable b{cur_.text};
      consume();
      expect(Token::Kind::RParen, "')'");
      return FilterExpr::make_iou(std::move(a), std::move(b));
    }
    fail("expected filter expression");
  }

  void validate() const {
    if (rule_.body.positive.empty() && rule_.body.static_patterns.empty())
      throw ParseError("rule body needs a positive block or static pattern", 1, 1);
    if (!options_.enforce_safety) return;

    std::set<std::string> positive_vars;
    auto collect = [&](const PatternStmt& stmt) {
      for (const Variable& v : pattern_variables(stmt)) positive_vars.insert(v.name);
    };
    for (const StreamBlock& b : rule_.body.positive) {
      for (const PatternStmt& s : b.patterns) collect(s);
      if (b.block_ts_var) positive_vars.insert(b.block_ts_var->name);
    }
    for (const PlainPattern& p : rule_.body.static_patterns) collect(PatternStmt{p});

    for (const PatternStmt& s : rule_.head) {
      for (const Variable& v : pattern_variables(s)) {
        if (!positive_vars.count(v.name))
          throw ParseError("unsafe head variable: ?" + v.name, 1, 1);
      }
    }
  }

  QlLexer lexer_;
  Token cur_;
  const ParseOptions& options_;
  Rule rule_;
  std::vector<PlainPattern> pending_;
};

/// Scans sh:NodeShape wrappers and hands each sh:construct string to the
/// query parser.
class RuleDocParser {
 public:
  RuleDocParser(std::string_view text, const ParseOptions& options)
      : lexer_(text, 0), options_(options) {
    consume();
  }

  std::vector<Rule> parse() {
    std::vector<Rule> rules;
    while (cur_.kind != Token::Kind::End) {
      if (cur_.kind == Token::Kind::PrefixDecl) {
        parse_prefix_decl();
        continue;
      }
      rules.push_back(parse_shape());
    }
    return rules;
  }

 private:
  void consume() { cur_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur_.line, cur_.col);
  }

  void expect(Token::Kind kind, const char* what) {
    if (cur_.kind != kind) fail(std::string("expected ") + what);
    consume();
  }

  void parse_prefix_decl() {
    consume();
    if (cur_.kind != Token::Kind::PName || !cur_.text.empty()) fail("expected prefix name");
    std::string prefix = cur_.prefix;
    consume();
    if (cur_.kind != Token::Kind::IriRef) fail("expected IRI in @prefix");
    local_prefixes_.declare(prefix, cur_.text);
    consume();
    expect(Token::Kind::Dot, "'.'");
  }

  Iri shape_iri(const Token& tok) const {
    ParseOptions merged = options_;
    for (const auto& [p, ns] : local_prefixes_.entries()) merged.prefixes.declare(p, ns);
    if (tok.kind == Token::Kind::PName) {
      if (!merged.prefixes.has(tok.prefix))
        throw ParseError("unknown prefix: '" + tok.prefix + ":'", tok.line, tok.col);
      return Iri{merged.prefixes.expand(tok.prefix, tok.text)};
    }
    auto colon = tok.text.find(':');
    if (colon != std::string::npos && merged.prefixes.has(tok.text.substr(0, colon)))
      return Iri{merged.prefixes.expand(tok.text.substr(0, colon), tok.text.substr(colon + 1))};
    return Iri{tok.text};
  }

  bool pname_is(const Token& tok, const char* ns, const char* local) const {
    if (tok.kind != Token::Kind::PName) return false;
    if (!options_.prefixes.has(tok.prefix)) return false;
    return options_.prefixes.expand(tok.prefix, tok.text) == std::string(ns) + local;
  }

  Rule parse_shape() {
    if (cur_.kind != Token::Kind::PName && cur_.kind != Token::Kind::IriRef)
      fail("expected rule shape IRI");
    Iri id = shape_iri(cur_);
    consume();

    if (!(cur_.kind == Token::Kind::Ident && cur_.text == "a")) fail("expected 'a sh:NodeShape'");
    consume();
    if (!pname_is(cur_, rdf::ns::kShacl, "NodeShape")) fail("expected sh:NodeShape");
    consume();
    expect(Token::Kind::Semi, "';'");

    if (!pname_is(cur_, rdf::ns::kShacl, "rule")) fail("expected sh:rule");
    consume();
    expect(Token::Kind::LBracket, "'['");

    std::optional<Rule> rule;
    while (cur_.kind != Token::Kind::RBracket) {
      if (cur_.kind == Token::Kind::Ident && cur_.text == "a") {
        consume();
        if (!pname_is(cur_, rdf::ns::kShacl, "CQELSRule")) fail("expected sh:CQELSRule");
        consume();
      } else if (pname_is(cur_, rdf::ns::kShacl, "prefixes")) {
        consume();
        if (cur_.kind != Token::Kind::PName) fail("expected prefix after sh:prefixes");
        consume();
      } else if (pname_is(cur_, rdf::ns::kShacl, "construct")) {
        consume();
        if (cur_.kind != Token::Kind::TripleString) fail("expected \"\"\" query string");
        ParseOptions merged = options_;
        for (const auto& [p, ns] : local_prefixes_.entries()) merged.prefixes.declare(p, ns);
        QueryParser qp(cur_.text, id, merged, cur_.line - 1);
        rule = qp.parse();
        consume();
      } else {
        fail("unexpected property in sh:rule");
      }
      if (cur_.kind == Token::Kind::Semi) consume();
    }
    consume();  // ]
    // Shapes end with '] ;' or '] .'; both (and a bare ']') are accepted.
    if (cur_.kind == Token::Kind::Semi || cur_.kind == Token::Kind::Dot) consume();

    if (!rule) fail("rule shape without sh:construct");
    return std::move(*rule);
  }

  QlLexer lexer_;
  Token cur_;
  const ParseOptions& options_;
  rdf::PrefixMap local_prefixes_;
};

}  // namespace

std::vector<Rule> parse_rule_document(std::string_view text, const ParseOptions& options) {
  return RuleDocParser(text, options).parse();
}

Rule parse_query(std::string_view text, Iri rule_id, const ParseOptions& options) {
  return QueryParser(text, std::move(rule_id), options, 0).parse();
}

bool filter_equal(const FilterExpr* a, const FilterExpr* b) {
  if (a == b) return true;
  if (a == nullptr || b == nullptr) return false;
  if (a->op != b->op) return false;
  switch (a->op) {
    case FilterExpr::Op::Var:
      return a->var == b->var;
    case FilterExpr::Op::Num:
      return a->number == b->number && a->lexical == b->lexical;
    case FilterExpr::Op::Iou:
      return a->args == b->args;
    default:
      return filter_equal(a->lhs, b->lhs) && filter_equal(a->rhs, b->rhs);
  }
}

bool StreamBlock::operator==(const StreamBlock& o) const {
  if (stream != o.stream || window != o.window || block_ts_var != o.block_ts_var ||
      patterns != o.patterns || filters.size() != o.filters.size())
    return false;
  for (std::size_t i = 0; i < filters.size(); ++i)
    if (!filter_equal(filters[i], o.filters[i])) return false;
  return true;
}

bool BodySpec::operator==(const BodySpec& o) const {
  if (positive != o.positive || naf != o.naf || static_patterns != o.static_patterns ||
      filters.size() != o.filters.size())
    return false;
  for (std::size_t i = 0; i < filters.size(); ++i)
    if (!filter_equal(filters[i], o.filters[i])) return false;
  return true;
}

bool Rule::operator==(const Rule& o) const {
  return id == o.id && kind == o.kind && head == o.head && body == o.body;
}

std::vector<Variable> pattern_variables(const PatternStmt& stmt) {
  std::vector<Variable> vars;
  auto add = [&](const TermOrVar& tv) {
    if (is_var(tv)) vars.push_back(as_var(tv));
  };
  if (std::holds_alternative<PlainPattern>(stmt)) {
    const PlainPattern& p = std::get<PlainPattern>(stmt);
    add(p.subject);
    add(p.predicate);
    add(p.object);
    if (p.ts_var) vars.push_back(*p.ts_var);
  } else {
    const QtStatement& q = std::get<QtStatement>(stmt);
    add(q.qt.subject);
    add(q.qt.predicate);
    add(q.qt.object);
    if (q.ts_var) vars.push_back(*q.ts_var);
    for (const PredObj& po : q.annotations) {
      add(po.predicate);
      add(po.object);
    }
  }
  return vars;
}

std::vector<Variable> filter_variables(const FilterExpr& expr) {
  std::vector<Variable> vars;
  switch (expr.op) {
    case FilterExpr::Op::Var:
      vars.push_back(expr.var);
      break;
    case FilterExpr::Op::Num:
      break;
    case FilterExpr::Op::Iou:
      vars = expr.args;
      break;
    default:
      if (expr.lhs)
        for (auto& v : filter_variables(*expr.lhs)) vars.push_back(v);
      if (expr.rhs)
        for (auto& v : filter_variables(*expr.rhs)) vars.push_back(v);
  }
  return vars;
}

}  // namespace ssf::ql
