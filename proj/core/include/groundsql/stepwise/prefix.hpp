#pragma once

#include <cstddef>
#include <string>

#include "groundsql/db/gateway.hpp"
#include "groundsql/db/result_table.hpp"
#include "groundsql/error.hpp"
#include "groundsql/explain/plan.hpp"
#include "groundsql/sql/ast.hpp"

namespace groundsql::stepwise {

class InvalidPrefix : public Error {
 public:
  explicit InvalidPrefix(const std::string& what) : Error("InvalidPrefix", what) {}
};

struct PrefixQuery {
  sql::QueryAst ast;
  /// True when the SELECT list is a placeholder rather than the query's own.
  bool synthesized_select = false;
  std::size_t unit_index = 0;
  std::size_t step_index = 1;
};

/// The runnable query behind "everything up to and including step k" of a
/// block. Missing SELECT becomes `SELECT *`, or the grouping keys plus a
/// record count once the data is grouped. Units consumed through subquery
/// references come along in full. Throws InvalidPrefix for a missing step.
PrefixQuery prefix_query(const explain::ExplanationPlan& plan, std::size_t unit_index, std::size_t step_index);

struct IntermediateResult {
  PrefixQuery prefix;
  std::string sql;
  db::ResultTable result;
};

/// Executes the prefix query. Engine errors surface as db::ExecError carrying
/// the temporary SQL.
IntermediateResult intermediate_result(const db::Database& database, const explain::ExplanationPlan& plan,
                                       std::size_t unit_index, std::size_t step_index,
                                       const db::ExecLimits& limits = {});

}  // namespace groundsql::stepwise
