#include "txnlab/statement.hpp"

#include <charconv>

namespace txnlab {

std::string render_value(const Value& v) {
  if (std::holds_alternative<int64_t>(v)) {
    char buf[24];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), std::get<int64_t>(v));
    return std::string(buf, end);
  }
  return std::get<std::string>(v);
}

namespace {

void append_token(std::string& out, const std::string& attr, const Value& value) {
  out += attr;
  out += '=';
  out += render_value(value);
}

}  // namespace

std::set<Reference> extract_references(const std::vector<Statement>& statements, RefRep rep,
                                       RefGran gran, const DomainMap& dm) {
  std::set<Reference> out;
  auto attr_of = [&](const std::string& a) -> const std::string& {
    return rep == RefRep::kCanonical ? dm.canonical(a) : a;
  };

  for (const Statement& stmt : statements) {
    if (!stmt.where.empty()) {
      if (gran == RefGran::kAll) {
        // The labeled part of the conjunction becomes one token, attributes
        // in statement order.
        std::string token;
        for (const Predicate& p : stmt.where) {
          if (!p.labeled) continue;
          if (!token.empty()) token += " AND ";
          append_token(token, attr_of(p.attr), p.value);
        }
        if (!token.empty()) out.insert(Reference{std::move(token)});
      } else {
        for (const Predicate& p : stmt.where) {
          if (!p.labeled) continue;
          std::string token;
          append_token(token, attr_of(p.attr), p.value);
          out.insert(Reference{std::move(token)});
        }
      }
    }
    // Assignments always yield individual references; computed values are not
    // input parameters and emit nothing.
    for (const ColumnWrite& w : stmt.sets) {
      if (!w.labeled || w.expr == WriteExpr::kAddCaptured) continue;
      std::string token;
      append_token(token, attr_of(w.attr), w.value);
      out.insert(Reference{std::move(token)});
    }
  }
  return out;
}

}  // namespace txnlab
