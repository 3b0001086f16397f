#include "cnp/parser.hpp"

#include <charconv>
#include <limits>
#include <optional>
#include <set>

namespace cnp {

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error([&] {
        std::string msg = "invalid control network";
        for (const auto& d : diagnostics) msg += "\n  " + to_string(d);
        return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

namespace {

enum class Tok { Ident, Int, String, Arrow, Colon, Semi, LParen, RParen, Comma, Dollar, Amp, Equals, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier, decoded string, or integer digits
  std::int64_t number = 0;
  SourceSpan span;
};

std::string_view describe(Tok kind) {
  switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::String: return "string";
    case Tok::Arrow: return "'->'";
    case Tok::Colon: return "':'";
    case Tok::Semi: return "';'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Dollar: return "'$'";
    case Tok::Amp: return "'&'";
    case Tok::Equals: return "'='";
    case Tok::End: return "end of line";
  }
  return "token";
}

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex_line(std::string_view line, int lineno) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto at = [&](std::size_t pos) { return SourceSpan{lineno, static_cast<int>(pos) + 1}; };
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    Token t;
    t.span = at(i);
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < line.size() && ident_char(line[j])) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(line.substr(i, j - i));
      i = j;
    } else if (digit(c) || (c == '-' && i + 1 < line.size() && digit(line[i + 1]))) {
      std::size_t j = i + 1;
      while (j < line.size() && digit(line[j])) ++j;
      t.kind = Tok::Int;
      t.text = std::string(line.substr(i, j - i));
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (ec != std::errc() || ptr != t.text.data() + t.text.size())
        throw ParseError(t.span, "integer literal out of range");
      i = j;
    } else if (c == '"') {
      std::size_t j = i + 1;
      bool closed = false;
      while (j < line.size()) {
        char d = line[j];
        if (d == '"') {
          closed = true;
          ++j;
          break;
        }
        if (d == '\\') {
          if (j + 1 >= line.size()) break;
          char e = line[j + 1];
          if (e == '"') t.text += '"';
          else if (e == '\\') t.text += '\\';
          else if (e == 'n') t.text += '\n';
          else throw ParseError(at(j), std::string("unknown escape '\\") + e + "'");
          j += 2;
          continue;
        }
        t.text += d;
        ++j;
      }
      if (!closed) throw ParseError(t.span, "unterminated string literal");
      t.kind = Tok::String;
      i = j;
    } else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      t.kind = Tok::Arrow;
      i += 2;
    } else {
      switch (c) {
        case ':': t.kind = Tok::Colon; break;
        case ';': t.kind = Tok::Semi; break;
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case ',': t.kind = Tok::Comma; break;
        case '$': t.kind = Tok::Dollar; break;
        case '&': t.kind = Tok::Amp; break;
        case '=': t.kind = Tok::Equals; break;
        default: {
          std::string shown = (static_cast<unsigned char>(c) >= 0x20 && static_cast<unsigned char>(c) < 0x7f)
                                  ? std::string(1, c)
                                  : "\\x" + std::to_string(static_cast<unsigned char>(c));
          throw ParseError(t.span, "unexpected character '" + shown + "'");
        }
      }
      ++i;
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.span = at(line.size());
  out.push_back(end);
  return out;
}

class LineParser {
 public:
  explicit LineParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

  bool at_keyword(std::string_view kw) const { return peek().kind == Tok::Ident && peek().text == kw; }

  const Token& expect(Tok kind) {
    if (peek().kind != kind)
      throw ParseError(peek().span,
                       "expected " + std::string(describe(kind)) + ", found " + std::string(describe(peek().kind)));
    return next();
  }

  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) throw ParseError(peek().span, "expected '" + std::string(kw) + "'");
    next();
  }

  void expect_end() {
    if (peek().kind != Tok::End) throw ParseError(peek().span, "unexpected " + std::string(describe(peek().kind)));
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

struct PendingEndpoint {
  std::string state;
  SourceSpan span;
};

struct SubnetBuilder {
  Subnet subnet;
  std::set<std::string> states;
  std::vector<PendingEndpoint> endpoints;
  bool has_init = false;

  void finish() const {
    for (const auto& ep : endpoints)
      if (!states.count(ep.state))
        throw ParseError(ep.span, "arrow endpoint '" + ep.state + "' is not a declared state of subnet '" +
                                      subnet.name + "'");
  }
};

Arg parse_arg(LineParser& p) {
  const Token& t = p.peek();
  switch (t.kind) {
    case Tok::String: return LiteralText{p.next().text};
    case Tok::Int: return LiteralInt{p.next().number};
    case Tok::Dollar: p.next(); return VarIn{p.expect(Tok::Ident).text};
    case Tok::Amp: p.next(); return VarOut{p.expect(Tok::Ident).text};
    default: throw ParseError(t.span, "expected argument, found " + std::string(describe(t.kind)));
  }
}

CallItem parse_item(LineParser& p) {
  const Token& name = p.expect(Tok::Ident);
  if (name.text == "call" && p.peek().kind == Tok::Ident) return SubnetCall{p.next().text};
  PrimitiveCall call{name.text, {}};
  p.expect(Tok::LParen);
  if (p.peek().kind != Tok::RParen) {
    call.args.push_back(parse_arg(p));
    while (p.peek().kind == Tok::Comma) {
      p.next();
      call.args.push_back(parse_arg(p));
    }
  }
  p.expect(Tok::RParen);
  return call;
}

int parse_limit(LineParser& p, std::string_view keyword) {
  p.expect_keyword(keyword);
  p.expect(Tok::Equals);
  const Token& v = p.expect(Tok::Int);
  if (v.number < std::numeric_limits<int>::min() || v.number > std::numeric_limits<int>::max())
    throw ParseError(v.span, std::string(keyword) + " value out of range");
  return static_cast<int>(v.number);
}

}  // namespace

ControlNetwork parse(std::string_view text) {
  ControlNetwork net;
  std::optional<SubnetBuilder> current;
  std::set<std::string> subnet_names;

  auto flush = [&] {
    if (!current) return;
    current->finish();
    net.subnets.push_back(std::move(current->subnet));
    current.reset();
  };

  int lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++lineno;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    LineParser p(lex_line(line, lineno));
    if (p.peek().kind == Tok::End) continue;

    const Token& head = p.peek();
    if (head.kind != Tok::Ident) throw ParseError(head.span, "expected 'net', 'state' or 'arrow'");

    if (head.text == "net") {
      p.next();
      const Token& name = p.expect(Tok::Ident);
      if (!subnet_names.insert(name.text).second)
        throw ParseError(name.span, "subnet '" + name.text + "' declared twice");
      p.expect(Tok::Colon);
      p.expect_end();
      flush();
      current.emplace();
      current->subnet.name = name.text;
    } else if (head.text == "state") {
      if (!current) throw ParseError(head.span, "state declared outside of a subnet");
      p.next();
      const Token& name = p.expect(Tok::Ident);
      if (!current->states.insert(name.text).second)
        throw ParseError(name.span, "state '" + name.text + "' declared twice");
      State st{name.text, std::nullopt};
      if (p.at_keyword("init")) {
        if (current->has_init) throw ParseError(p.peek().span, "subnet already has an initial state");
        p.next();
        current->has_init = true;
        current->subnet.initial = name.text;
      }
      if (p.at_keyword("final")) {
        p.next();
        current->subnet.finals.push_back(name.text);
      }
      if (p.at_keyword("visits")) st.visit_limit = parse_limit(p, "visits");
      p.expect_end();
      current->subnet.states.push_back(std::move(st));
    } else if (head.text == "arrow") {
      if (!current) throw ParseError(head.span, "arrow declared outside of a subnet");
      p.next();
      Arrow arrow;
      arrow.line = lineno;
      const Token& from = p.expect(Tok::Ident);
      p.expect(Tok::Arrow);
      const Token& to = p.expect(Tok::Ident);
      arrow.from = from.text;
      arrow.to = to.text;
      current->endpoints.push_back({from.text, from.span});
      current->endpoints.push_back({to.text, to.span});
      if (p.at_keyword("range")) arrow.range = parse_limit(p, "range");
      p.expect(Tok::Colon);
      if (p.peek().kind != Tok::End) {
        arrow.items.push_back(parse_item(p));
        while (p.peek().kind == Tok::Semi) {
          p.next();
          arrow.items.push_back(parse_item(p));
        }
      }
      p.expect_end();
      current->subnet.arrows.push_back(std::move(arrow));
    } else {
      throw ParseError(head.span, "unknown statement '" + head.text + "'");
    }
  }
  flush();

  if (net.subnets.empty()) throw ParseError(SourceSpan{lineno, 1}, "no subnet declared");
  if (auto diags = validate(net); !diags.empty()) throw ValidationError(std::move(diags));
  return net;
}

std::string serialize(const Arg& arg) {
  struct Visitor {
    std::string operator()(const LiteralText& t) const {
      std::string out = "\"";
      for (char c : t.value) {
        if (c == '"') out += "\\\"";
        else if (c == '\\') out += "\\\\";
        else if (c == '\n') out += "\\n";
        else out += c;
      }
      return out + "\"";
    }
    std::string operator()(const LiteralInt& i) const { return std::to_string(i.value); }
    std::string operator()(const VarIn& v) const { return "$" + v.name; }
    std::string operator()(const VarOut& v) const { return "&" + v.name; }
  };
  return std::visit(Visitor{}, arg);
}

std::string serialize(const CallItem& item) {
  if (const auto* call = std::get_if<SubnetCall>(&item)) return "call " + call->name;
  const auto& prim = std::get<PrimitiveCall>(item);
  std::string out = prim.name + "(";
  for (std::size_t i = 0; i < prim.args.size(); ++i) {
    if (i) out += ", ";
    out += serialize(prim.args[i]);
  }
  return out + ")";
}

std::string serialize(const ControlNetwork& net) {
  std::string out;
  for (std::size_t n = 0; n < net.subnets.size(); ++n) {
    const Subnet& sn = net.subnets[n];
    if (n) out += "\n";
    out += "net " + sn.name + ":\n";
    for (const auto& st : sn.states) {
      out += "  state " + st.name;
      if (st.name == sn.initial) out += " init";
      if (sn.is_final(st.name)) out += " final";
      if (st.visit_limit) out += " visits=" + std::to_string(*st.visit_limit);
      out += "\n";
    }
    for (const auto& a : sn.arrows) {
      out += "  arrow " + a.from + " -> " + a.to;
      if (a.range) out += " range=" + std::to_string(*a.range);
      out += ":";
      for (std::size_t i = 0; i < a.items.size(); ++i) out += (i ? "; " : " ") + serialize(a.items[i]);
      out += "\n";
    }
  }
  return out;
}

}  // namespace cnp
