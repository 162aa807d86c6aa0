#pragma once

// Text formats: relation files, the rule language, and instance directories.
//
// Relation file:
//   # relation R schema A,B
//   0,1
//   0,2
// Query file:
//   # comment
//   fd R: 1 -> 2
//   Q(A,B,C) :- R(A,B), S(B,C), T(A,C).

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "wcoj/core.hpp"
#include "wcoj/gen.hpp"
#include "wcoj/rewrite.hpp"

namespace wcoj {

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line(line),
        column(column),
        message(what) {}
  std::size_t line, column;
  std::string message;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A stored table: name, positional column names, rows in column order.
struct NamedRelation {
  std::string name;
  std::vector<std::string> columns;
  Relation data;  // schema 0..k-1
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
}

namespace detail {

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) lines.push_back(std::move(cur));
  return lines;
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace detail

inline NamedRelation parse_relation(const std::string& text) {
  auto lines = detail::split_lines(text);
  NamedRelation r;
  bool header = false;
  std::vector<Value> flat;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (detail::trim(line).empty()) continue;
    if (!header) {
      std::istringstream in(line);
      std::string hash, kw, name, skw, cols;
      in >> hash >> kw >> name >> skw >> cols;
      if (hash != "#" || kw != "relation" || skw != "schema" || name.empty() || cols.empty())
        throw ParseError(ln + 1, 1, "expected '# relation <name> schema A,B,...'");
      r.name = name;
      std::stringstream cs(cols);
      for (std::string c; std::getline(cs, c, ',');) {
        if (c.empty()) throw ParseError(ln + 1, line.find(cols) + 1, "empty column name");
        r.columns.push_back(c);
      }
      header = true;
      continue;
    }
    if (line[0] == '#') continue;
    std::size_t col = 0, fields = 0;
    while (col <= line.size()) {
      std::size_t end = line.find(',', col);
      if (end == std::string::npos) end = line.size();
      std::string field = detail::trim(line.substr(col, end - col));
      if (field.empty() || !std::all_of(field.begin(), field.end(), [](unsigned char ch) { return std::isdigit(ch); }))
        throw ParseError(ln + 1, col + 1, "expected a nonnegative integer");
      try {
        flat.push_back(std::stoull(field));
      } catch (const std::out_of_range&) {
        throw ParseError(ln + 1, col + 1, "value out of range");
      }
      ++fields;
      col = end + 1;
    }
    if (fields != r.columns.size())
      throw ParseError(ln + 1, 1, "row has " + std::to_string(fields) + " values, schema has " +
                                      std::to_string(r.columns.size()));
  }
  if (!header) throw ParseError(1, 1, "missing relation header");
  Schema s(r.columns.size());
  std::iota(s.begin(), s.end(), 0);
  r.data = Relation(s, std::move(flat));
  return r;
}

inline std::string format_relation(const std::string& name, const std::vector<std::string>& columns,
                                   const Relation& data) {
  std::string out = "# relation " + name + " schema ";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto row = data.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ",";
      out += std::to_string(row[c]);
    }
    out += "\n";
  }
  return out;
}

inline std::string format_tuples(const std::string& name, const std::vector<std::string>& columns,
                                 const std::vector<Tuple>& rows) {
  std::string out = "# relation " + name + " schema ";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& t : rows) {
    for (std::size_t c = 0; c < t.size(); ++c) {
      if (c) out += ",";
      out += std::to_string(t[c]);
    }
    out += "\n";
  }
  return out;
}

namespace detail {

class RuleLexer {
 public:
  explicit RuleLexer(const std::string& text) : text_(text) {}

  void skip() {
    for (;;) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
      if (pos_ < text_.size() && text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      return;
    }
  }

  bool at_end() {
    skip();
    return pos_ >= text_.size();
  }

  char peek() {
    skip();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  [[noreturn]] void fail(const std::string& what) { throw ParseError(line_, col_, what); }

  void expect(const std::string& tok) {
    skip();
    if (text_.compare(pos_, tok.size(), tok) != 0) fail("expected '" + tok + "'");
    for (std::size_t i = 0; i < tok.size(); ++i) advance();
  }

  bool accept(const std::string& tok) {
    skip();
    if (text_.compare(pos_, tok.size(), tok) != 0) return false;
    for (std::size_t i = 0; i < tok.size(); ++i) advance();
    return true;
  }

  std::string ident() {
    skip();
    auto ok_first = [](char ch) { return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_'; };
    auto ok_rest = [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\''; };
    if (pos_ >= text_.size() || !ok_first(text_[pos_])) fail("expected an identifier");
    std::string s;
    while (pos_ < text_.size() && ok_rest(text_[pos_])) {
      s += text_[pos_];
      advance();
    }
    return s;
  }

  std::size_t number() {
    skip();
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) fail("expected a number");
    std::size_t v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(text_[pos_] - '0');
      advance();
    }
    return v;
  }

  std::pair<std::size_t, std::size_t> where() {
    skip();
    return {line_, col_};
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& text_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

}  // namespace detail

/// Parses one rule plus optional `fd` lines. Variables are numbered by first
/// appearance in the text.
inline ConjunctiveQuery parse_query(const std::string& text) {
  detail::RuleLexer lx(text);
  ConjunctiveQuery c;
  std::map<std::string, Var> ids;
  auto var = [&](const std::string& name) {
    auto [it, fresh] = ids.emplace(name, static_cast<Var>(c.var_names.size()));
    if (fresh) c.var_names.push_back(name);
    return it->second;
  };
  auto atom_vars = [&]() {
    std::vector<Var> vs;
    lx.expect("(");
    if (!lx.accept(")")) {
      do vs.push_back(var(lx.ident()));
      while (lx.accept(","));
      lx.expect(")");
    }
    return vs;
  };
  bool have_rule = false;
  std::vector<std::pair<std::size_t, std::size_t>> fd_pos;
  while (!lx.at_end()) {
    auto at = lx.where();
    std::string name = lx.ident();
    if (name == "fd" && lx.peek() != '(') {
      SimpleFD fd;
      fd.symbol = lx.ident();
      lx.expect(":");
      fd.from = lx.number();
      lx.expect("->");
      fd.to = lx.number();
      if (fd.from == 0 || fd.to == 0 || fd.from == fd.to)
        throw ParseError(at.first, at.second, "functional dependency needs two distinct 1-based positions");
      c.fds.push_back(fd);
      fd_pos.push_back(at);
      continue;
    }
    if (have_rule) throw ParseError(at.first, at.second, "only one rule per file");
    c.head.symbol = name;
    c.head.vars = atom_vars();
    lx.expect(":-");
    do {
      auto aat = lx.where();
      std::string sym = lx.ident();
      auto vs = atom_vars();
      if (vs.empty()) throw ParseError(aat.first, aat.second, "body atom " + sym + " has no variables");
      c.body.emplace_back(sym, std::move(vs));
    } while (lx.accept(","));
    lx.expect(".");
    have_rule = true;
  }
  if (!have_rule) throw ParseError(1, 1, "no rule found");
  try {
    c.validate();
  } catch (const Error& e) {
    throw ParseError(1, 1, e.what());
  }
  for (std::size_t i = 0; i < c.fds.size(); ++i) {
    const auto& fd = c.fds[i];
    bool found = false;
    for (const auto& a : c.body)
      if (a.symbol == fd.symbol) {
        found = true;
        if (fd.from > a.vars.size() || fd.to > a.vars.size())
          throw ParseError(fd_pos[i].first, fd_pos[i].second, "position outside the arity of " + fd.symbol);
      }
    if (!found) throw ParseError(fd_pos[i].first, fd_pos[i].second, "fd names unknown relation " + fd.symbol);
  }
  return c;
}

inline std::string format_query(const ConjunctiveQuery& c) {
  std::string out;
  for (const auto& fd : c.fds)
    out += "fd " + fd.symbol + ": " + std::to_string(fd.from) + " -> " + std::to_string(fd.to) + "\n";
  return out + to_string(c) + "\n";
}

/// The rule text of a natural-join query, head over all attributes in order.
inline std::string format_query(const JoinQuery& q, const std::string& head = "Q") {
  std::string out = head + "(";
  for (std::size_t a = 0; a < q.num_attributes(); ++a) out += (a ? "," : "") + q.attribute_names[a];
  out += ") :- ";
  for (std::size_t e = 0; e < q.num_relations(); ++e) {
    if (e) out += ", ";
    out += q.relation_names[e] + "(";
    const auto& s = q.hypergraph.edges[e];
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + q.attribute_names[s[i]];
    out += ")";
  }
  return out + ".\n";
}

/// Reads `<dir>/<symbol>.rel` for every body symbol.
inline Database load_database(const std::filesystem::path& dir, const ConjunctiveQuery& c) {
  Database db;
  for (const auto& a : c.body) {
    if (db.count(a.symbol)) continue;
    auto path = dir / (a.symbol + ".rel");
    NamedRelation r = parse_relation(read_file(path));
    if (r.columns.size() != a.vars.size())
      throw SchemaMismatch("relation file " + path.string() + " has " + std::to_string(r.columns.size()) +
                           " columns, atom " + a.symbol + " uses " + std::to_string(a.vars.size()));
    db.emplace(a.symbol, std::move(r.data));
  }
  return db;
}

/// The natural-join query over all body variables (attribute = variable id);
/// atoms with repeated variables are filtered and narrowed.
inline JoinQuery body_join_query(const ConjunctiveQuery& c, const Database& db) {
  std::vector<Relation> rels;
  std::vector<std::string> names;
  for (const auto& a : c.body) {
    rels.push_back(view_relation(a, db));
    names.push_back(a.symbol);
  }
  return make_query(std::move(rels), c.var_names, std::move(names));
}

/// Head tuples (positional) of a join result over all body variables.
inline std::vector<Tuple> head_tuples(const ConjunctiveQuery& c, const Relation& joined) {
  std::vector<Tuple> out;
  for (std::size_t i = 0; i < joined.size(); ++i) {
    Tuple t;
    for (Var v : c.head.vars) t.push_back(joined.row(i)[*joined.position_of(v)]);
    out.push_back(std::move(t));
  }
  if (c.head.vars.empty()) out = joined.empty() ? std::vector<Tuple>{} : std::vector<Tuple>{Tuple{}};
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Writes one `.rel` file per relation, `query.q` and `manifest.json`.
inline void write_bundle(const std::filesystem::path& dir, const InstanceBundle& b) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["generator"] = b.generator;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : b.params) params[k] = v;
  manifest["params"] = params;
  manifest["expected_output"] = b.expected_output ? nlohmann::ordered_json(*b.expected_output) : nullptr;
  nlohmann::ordered_json rels = nlohmann::ordered_json::array();
  if (b.cq) {
    write_file(dir / "query.q", format_query(*b.cq));
    for (const auto& [name, r] : b.data) {
      std::vector<std::string> cols;
      for (std::size_t i = 0; i < r.arity(); ++i) cols.push_back("c" + std::to_string(i + 1));
      write_file(dir / (name + ".rel"), format_relation(name, cols, r));
      rels.push_back({{"name", name}, {"file", name + ".rel"}, {"rows", r.size()}});
    }
  } else {
    const JoinQuery& q = b.query;
    write_file(dir / "query.q", format_query(q));
    for (std::size_t e = 0; e < q.num_relations(); ++e) {
      std::vector<std::string> cols;
      for (Attr a : q.hypergraph.edges[e]) cols.push_back(q.attribute_names[a]);
      const auto& name = q.relation_names[e];
      write_file(dir / (name + ".rel"), format_relation(name, cols, q.relations[e]));
      rels.push_back({{"name", name}, {"file", name + ".rel"}, {"rows", q.relations[e].size()}});
    }
  }
  manifest["relations"] = rels;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace wcoj
