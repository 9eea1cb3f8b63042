#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "txnlab/statement.hpp"

using namespace txnlab;

namespace {

DomainMap stock_domains() {
  DomainMap dm;
  dm.add("s_i_id", "i_id");
  dm.add("s_w_id", "w_id");
  dm.add_identity("s_quantity");
  dm.add_identity("i_id");
  dm.add_identity("w_id");
  return dm;
}

Statement stock_update(int64_t quantity, int64_t item, int64_t warehouse) {
  Statement s;
  s.kind = StatementKind::kUpdate;
  s.table = "stock";
  s.where = {Predicate{"s_i_id", Value{item}, true}, Predicate{"s_w_id", Value{warehouse}, true}};
  s.sets = {ColumnWrite{"s_quantity", Value{quantity}, WriteExpr::kSet, true}};
  return s;
}

std::set<std::string> tokens(const std::set<Reference>& refs) {
  std::set<std::string> out;
  for (const Reference& r : refs) out.insert(r.token);
  return out;
}

}  // namespace

TEST_CASE("literal single-attribute extraction lists each predicate and assignment") {
  const auto refs = extract_references({stock_update(5, 1, 5)}, RefRep::kLiteral,
                                       RefGran::kSingle, stock_domains());
  CHECK(tokens(refs) == std::set<std::string>{"s_i_id=1", "s_w_id=5", "s_quantity=5"});
}

TEST_CASE("canonical extraction rewrites attributes to their domains") {
  const auto refs = extract_references({stock_update(5, 1, 5)}, RefRep::kCanonical,
                                       RefGran::kSingle, stock_domains());
  CHECK(tokens(refs) == std::set<std::string>{"i_id=1", "w_id=5", "s_quantity=5"});
}

TEST_CASE("all-granularity joins the predicate conjunction into one token") {
  const auto literal = extract_references({stock_update(5, 1, 5)}, RefRep::kLiteral,
                                          RefGran::kAll, stock_domains());
  CHECK(tokens(literal) == std::set<std::string>{"s_i_id=1 AND s_w_id=5", "s_quantity=5"});

  const auto canonical = extract_references({stock_update(5, 1, 5)}, RefRep::kCanonical,
                                            RefGran::kAll, stock_domains());
  CHECK(tokens(canonical) == std::set<std::string>{"i_id=1 AND w_id=5", "s_quantity=5"});
}

TEST_CASE("duplicate tokens across statements collapse into one reference") {
  const auto refs = extract_references({stock_update(5, 1, 5), stock_update(5, 1, 5)},
                                       RefRep::kLiteral, RefGran::kSingle, stock_domains());
  CHECK(refs.size() == 3);
}

TEST_CASE("unlabeled predicates execute but emit no reference") {
  Statement s = stock_update(5, 1, 5);
  s.where.push_back(Predicate{"s_order_cnt", Value{int64_t{3}}, /*labeled=*/false});

  const auto single =
      extract_references({s}, RefRep::kLiteral, RefGran::kSingle, stock_domains());
  CHECK(tokens(single) == std::set<std::string>{"s_i_id=1", "s_w_id=5", "s_quantity=5"});

  const auto all = extract_references({s}, RefRep::kLiteral, RefGran::kAll, stock_domains());
  CHECK(tokens(all) == std::set<std::string>{"s_i_id=1 AND s_w_id=5", "s_quantity=5"});
}

TEST_CASE("a fully unlabeled conjunction contributes no token at all") {
  Statement s;
  s.kind = StatementKind::kSelect;
  s.table = "stock";
  s.where = {Predicate{"s_i_id", Value{int64_t{1}}, false},
             Predicate{"s_w_id", Value{int64_t{5}}, false}};
  const auto refs = extract_references({s}, RefRep::kLiteral, RefGran::kAll, stock_domains());
  CHECK(refs.empty());
}

TEST_CASE("computed and unlabeled assignments emit no reference") {
  Statement s;
  s.kind = StatementKind::kUpdate;
  s.table = "stock";
  s.where = {Predicate{"s_i_id", Value{int64_t{1}}, true}};
  s.sets = {ColumnWrite{"s_quantity", Value{int64_t{0}}, WriteExpr::kAddCaptured, true},
            ColumnWrite{"s_w_id", Value{int64_t{9}}, WriteExpr::kSet, false}};
  const auto refs = extract_references({s}, RefRep::kLiteral, RefGran::kSingle, stock_domains());
  CHECK(tokens(refs) == std::set<std::string>{"s_i_id=1"});
}

TEST_CASE("insert values produce individual references and no conjunction") {
  Statement s;
  s.kind = StatementKind::kInsert;
  s.table = "stock";
  s.sets = {ColumnWrite{"s_i_id", Value{int64_t{7}}, WriteExpr::kSet, true},
            ColumnWrite{"s_w_id", Value{int64_t{2}}, WriteExpr::kSet, true}};
  const auto refs = extract_references({s}, RefRep::kCanonical, RefGran::kAll, stock_domains());
  CHECK(tokens(refs) == std::set<std::string>{"i_id=7", "w_id=2"});
}

TEST_CASE("canonical lookup of an unmapped attribute is a configuration error") {
  Statement s = stock_update(5, 1, 5);
  s.where.push_back(Predicate{"mystery", Value{int64_t{1}}, true});
  CHECK_THROWS_AS(extract_references({s}, RefRep::kCanonical, RefGran::kSingle, stock_domains()),
                  ConfigError);
  // Literal extraction never consults the domain map.
  CHECK_NOTHROW(extract_references({s}, RefRep::kLiteral, RefGran::kSingle, stock_domains()));
}

TEST_CASE("values render negatively and as strings") {
  CHECK(render_value(Value{int64_t{-12}}) == "-12");
  CHECK(render_value(Value{std::string{"abc"}}) == "abc");
}
