#include "ssf/rdf/turtle.hpp"

#include <cctype>
#include <sstream>

#include "ssf/rdf/vocab.hpp"

namespace ssf::rdf {

std::string PrefixMap::expand(const std::string& prefix, const std::string& local) const {
  auto it = map_.find(prefix);
  if (it == map_.end()) throw std::out_of_range("unknown prefix: '" + prefix + ":'");
  return it->second + local;
}

namespace {

bool valid_local(std::string_view local) {
  if (local.empty()) return false;
  if (!std::isalnum(static_cast<unsigned char>(local[0])) && local[0] != '_') return false;
  for (char c : local) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

}  // namespace

std::optional<std::string> PrefixMap::qualify(const std::string& iri) const {
  const std::string* best_ns = nullptr;
  const std::string* best_prefix = nullptr;
  for (const auto& [prefix, ns] : map_) {
    if (ns.empty() || iri.size() <= ns.size()) continue;
    if (iri.compare(0, ns.size(), ns) != 0) continue;
    if (best_ns == nullptr || ns.size() > best_ns->size()) {
      best_ns = &ns;
      best_prefix = &prefix;
    }
  }
  if (best_ns == nullptr) return std::nullopt;
  std::string local = iri.substr(best_ns->size());
  if (!valid_local(local)) return std::nullopt;
  return *best_prefix + ":" + local;
}

const PrefixMap& standard_prefixes() {
  static const PrefixMap prefixes = [] {
    PrefixMap p;
    p.declare("", ns::kDefault);
    p.declare("ssr", ns::kSsr);
    p.declare("sosa", ns::kSosa);
    p.declare("rdf", ns::kRdf);
    p.declare("sh", ns::kShacl);
    p.declare("xsd", ns::kXsd);
    return p;
  }();
  return prefixes;
}

namespace {

struct Token {
  enum class Kind {
    IriRef,      // <...>
    PName,       // p:local or :local
    Blank,       // _:label
    String,      // '...'
    Integer,
    Decimal,
    A,           // keyword a
    PrefixDecl,  // @prefix
    Semi,
    Dot,
    QtOpen,   // <<
    QtClose,  // >>
    End,
  };
  Kind kind = Kind::End;
  std::string text;    // local payload (iri body, pname text, string value, number lexical)
  std::string prefix;  // for PName
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_trivia();
    Token tok;
    tok.line = line_;
    tok.col = col_;
    if (eof()) return tok;

    char c = peek();
    if (c == ';') {
      advance();
      tok.kind = Token::Kind::Semi;
      return tok;
    }
    if (c == '.') {
      advance();
      tok.kind = Token::Kind::Dot;
      return tok;
    }
    if (c == '<') {
      if (peek(1) == '<') {
        advance();
        advance();
        tok.kind = Token::Kind::QtOpen;
        return tok;
      }
      return lex_iriref(tok);
    }
    if (c == '>' && peek(1) == '>') {
      advance();
      advance();
      tok.kind = Token::Kind::QtClose;
      return tok;
    }
    if (c == '\'') return lex_string(tok);
    if (c == '@') return lex_at(tok);
    if (c == '_' && peek(1) == ':') return lex_blank(tok);
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '+' || c == '-') && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return lex_number(tok);
    }
    if (c == ':' || std::isalpha(static_cast<unsigned char>(c))) return lex_name(tok);
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

  Token& lex_iriref(Token& tok) {
    advance();  // consume <
    std::string body;
    while (!eof() && peek() != '>') {
      if (peek() == '\n') throw ParseError("unterminated IRI", tok.line, tok.col);
      body += peek();
      advance();
    }
    if (eof()) throw ParseError("unterminated IRI", tok.line, tok.col);
    advance();  // consume >
    tok.kind = Token::Kind::IriRef;
    tok.text = std::move(body);
    return tok;
  }

  Token& lex_string(Token& tok) {
    advance();  // consume '
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
          case 'r': value += '\r'; break;
          default:
            throw ParseError(std::string("unknown escape '\\") + esc + "'", line_, col_);
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

  Token& lex_at(Token& tok) {
    advance();  // consume @
    std::string word;
    while (!eof() && std::isalpha(static_cast<unsigned char>(peek()))) {
      word += peek();
      advance();
    }
    if (word != "prefix") throw ParseError("unknown directive '@" + word + "'", tok.line, tok.col);
    tok.kind = Token::Kind::PrefixDecl;
    return tok;
  }

  Token& lex_blank(Token& tok) {
    advance();  // _
    advance();  // :
    std::string label;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      label += peek();
      advance();
    }
    if (label.empty()) throw ParseError("empty blank node label", tok.line, tok.col);
    tok.kind = Token::Kind::Blank;
    tok.text = std::move(label);
    return tok;
  }

  Token& lex_number(Token& tok) {
    std::string lexical;
    if (peek() == '+' || peek() == '-') {
      lexical += peek();
      advance();
    }
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
    if (peek() != ':') {
      if (prefix == "a") {
        tok.kind = Token::Kind::A;
        return tok;
      }
      throw ParseError("expected ':' after name '" + prefix + "'", tok.line, tok.col);
    }
    advance();  // consume :
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

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class FactParser {
 public:
  FactParser(std::string_view text, const PrefixMap& initial, Tick default_tick)
      : lexer_(text), prefixes_(initial), default_tick_(default_tick) {
    consume();
  }

  std::vector<TimestampedFact> parse() {
    std::vector<TimestampedFact> facts;
    while (cur_.kind != Token::Kind::End) {
      if (cur_.kind == Token::Kind::PrefixDecl) {
        parse_prefix_decl();
      } else {
        parse_statement_group(facts);
      }
    }
    return facts;
  }

 private:
  void consume() { cur_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur_.line, cur_.col); }

  void expect(Token::Kind kind, const char* what) {
    if (cur_.kind != kind) fail(std::string("expected ") + what);
    consume();
  }

  void parse_prefix_decl() {
    consume();  // @prefix
    if (cur_.kind != Token::Kind::PName || !cur_.text.empty()) fail("expected prefix name");
    std::string prefix = cur_.prefix;
    consume();
    if (cur_.kind != Token::Kind::IriRef) fail("expected IRI in @prefix");
    prefixes_.declare(prefix, cur_.text);
    consume();
    expect(Token::Kind::Dot, "'.' after @prefix");
  }

  Iri expand_pname(const Token& tok) {
    if (!prefixes_.has(tok.prefix))
      throw ParseError("unknown prefix: '" + tok.prefix + ":'", tok.line, tok.col);
    return Iri{prefixes_.expand(tok.prefix, tok.text)};
  }

  Iri parse_verb() {
    if (cur_.kind == Token::Kind::A) {
      consume();
      return Iri{std::string(kRdfType)};
    }
    if (cur_.kind == Token::Kind::IriRef) {
      Iri iri{cur_.text};
      consume();
      return iri;
    }
    if (cur_.kind == Token::Kind::PName) {
      Iri iri = expand_pname(cur_);
      consume();
      return iri;
    }
    fail("expected predicate");
  }

  Term parse_term(bool allow_literal) {
    switch (cur_.kind) {
      case Token::Kind::IriRef: {
        Term t = Term::iri(cur_.text);
        consume();
        return t;
      }
      case Token::Kind::PName: {
        Term t = Term(Term::Repr{expand_pname(cur_)});
        consume();
        return t;
      }
      case Token::Kind::Blank: {
        Term t = Term::blank(cur_.text);
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
        Term t = Term::literal(cur_.text, xsd::kInteger);
        consume();
        return t;
      }
      case Token::Kind::Decimal: {
        if (!allow_literal) fail("literal not allowed here");
        Term t = Term::literal(cur_.text, xsd::kDecimal);
        consume();
        return t;
      }
      case Token::Kind::QtOpen:
        return parse_quoted_triple();
      default:
        fail("expected term");
    }
  }

  Term parse_quoted_triple() {
    int line = cur_.line, col = cur_.col;
    consume();  // <<
    Term subject = parse_term(false);
    Iri predicate = parse_verb();
    Term object = parse_term(true);
    expect(Token::Kind::QtClose, "'>>'");
    if (subject.quote_depth() >= 2 || object.quote_depth() >= 2)
      throw ParseError("quoted triple nested deeper than 2 levels", line, col);
    return Term::quoted(std::move(subject), std::move(predicate), std::move(object));
  }

  void parse_statement_group(std::vector<TimestampedFact>& out) {
    Term subject = parse_term(false);
    std::vector<Triple> group;
    std::optional<Tick> timestamp;

    while (true) {
      Iri predicate = parse_verb();
      int obj_line = cur_.line, obj_col = cur_.col;
      Term object = parse_term(true);

      if (predicate.value == vocab::kResultTime) {
        if (timestamp.has_value())
          throw ParseError("duplicate sosa:resultTime in statement group", obj_line, obj_col);
        if (!object.is_literal() || object.as_literal().datatype.value != xsd::kInteger)
          throw ParseError("sosa:resultTime expects an integer", obj_line, obj_col);
        Tick t = std::stoll(object.as_literal().lexical);
        if (t < 0) throw ParseError("negative timestamp", obj_line, obj_col);
        timestamp = t;
      } else {
        group.push_back(Triple{subject, std::move(predicate), std::move(object)});
      }

      if (cur_.kind == Token::Kind::Semi) {
        consume();
        if (cur_.kind == Token::Kind::Dot) break;  // tolerate ';' before '.'
        continue;
      }
      break;
    }
    expect(Token::Kind::Dot, "'.' at end of statement");

    Tick t = timestamp.value_or(default_tick_);
    for (Triple& triple : group) out.push_back(TimestampedFact{std::move(triple), t});
  }

  Lexer lexer_;
  Token cur_;
  PrefixMap prefixes_;
  Tick default_tick_;
};

std::string escape_string(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '\'': out += "\\'"; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<TimestampedFact> parse_fact_document(std::string_view text, const PrefixMap& initial,
                                                 Tick default_tick) {
  return FactParser(text, initial, default_tick).parse();
}

PrefixMap parse_prefix_document(std::string_view text, const PrefixMap& initial) {
  PrefixMap out = initial;
  Lexer lexer(text);
  Token tok = lexer.next();
  while (tok.kind != Token::Kind::End) {
    if (tok.kind != Token::Kind::PrefixDecl)
      throw ParseError("prelude may only contain @prefix lines", tok.line, tok.col);
    Token name = lexer.next();
    if (name.kind != Token::Kind::PName || !name.text.empty())
      throw ParseError("expected prefix name", name.line, name.col);
    Token iri = lexer.next();
    if (iri.kind != Token::Kind::IriRef) throw ParseError("expected IRI", iri.line, iri.col);
    out.declare(name.prefix, iri.text);
    Token dot = lexer.next();
    if (dot.kind != Token::Kind::Dot) throw ParseError("expected '.'", dot.line, dot.col);
    tok = lexer.next();
  }
  return out;
}

std::string serialize_term(const Term& term, const PrefixMap& prefixes) {
  if (term.is_iri()) {
    if (auto q = prefixes.qualify(term.as_iri().value)) return *q;
    return "<" + term.as_iri().value + ">";
  }
  if (term.is_blank()) return "_:" + term.as_blank().label;
  if (term.is_literal()) {
    const Literal& lit = term.as_literal();
    if (lit.datatype.value == xsd::kInteger || lit.datatype.value == xsd::kDecimal)
      return lit.lexical;
    return "'" + escape_string(lit.lexical) + "'";
  }
  const QuotedTriple& qt = term.as_quoted();
  std::string pred = serialize_term(Term(Term::Repr{qt.predicate}), prefixes);
  return "<<" + serialize_term(*qt.subject, prefixes) + " " + pred + " " +
         serialize_term(*qt.object, prefixes) + ">>";
}

std::string serialize_fact(const TimestampedFact& fact, const PrefixMap& prefixes) {
  std::string pred =
      fact.triple.predicate.value == kRdfType
          ? "a"
          : serialize_term(Term(Term::Repr{fact.triple.predicate}), prefixes);
  std::ostringstream out;
  out << serialize_term(fact.triple.subject, prefixes) << " " << pred << " "
      << serialize_term(fact.triple.object, prefixes) << "; "
      << serialize_term(Term(Term::Repr{Iri{vocab::kResultTime}}), prefixes) << " "
      << fact.timestamp << ".";
  return out.str();
}

std::string serialize_document(const std::vector<TimestampedFact>& facts,
                               const PrefixMap& prefixes) {
  std::ostringstream out;
  for (const auto& [prefix, ns] : prefixes.entries())
    out << "@prefix " << prefix << ": <" << ns << "> .\n";
  for (const TimestampedFact& f : facts) out << serialize_fact(f, prefixes) << "\n";
  return out.str();
}

std::string format_double(double value) {
  for (int precision = 15; precision <= 17; ++precision) {
    std::ostringstream out;
    out.precision(precision);
    out << value;
    std::string s = out.str();
    if (s.find('e') == std::string::npos && s.find('E') == std::string::npos &&
        std::strtod(s.c_str(), nullptr) == value) {
      if (s.find('.') == std::string::npos) s += ".0";
      return s;
    }
  }
  // Tiny or huge magnitudes: fixed notation, trailing zeros trimmed.
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(24);
  out << value;
  std::string s = out.str();
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s += "0";
  return s;
}

}  // namespace ssf::rdf
