#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "groundsql/explain/explainer.hpp"
#include "groundsql/link/linker.hpp"
#include "groundsql/link/similarity.hpp"
#include "groundsql/sql/parser.hpp"
#include "groundsql/util/utf8.hpp"
#include "support.hpp"

using namespace groundsql;
using explain::ColumnTarget;
using explain::SubqueryResultTarget;
using explain::TableTarget;
using link::HighlightTarget;
using link::StepId;

namespace {

struct Loaded {
  sql::Schema schema;
  explain::ExplanationPlan plan;
};

Loaded load(const std::string& db_path, const std::string& query) {
  const auto db = db::open_database(db_path);
  Loaded l;
  l.schema = db->introspect();
  l.plan = explain::explain(sql::parse_sql(query, &l.schema), l.schema);
  return l;
}

Loaded scenario() { return load(testkit::database_path("travel_flights"), testkit::kScenarioSql); }

bool same_spans(const std::vector<explain::EntitySpan>& a, const std::vector<explain::EntitySpan>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].start != b[i].start || a[i].end != b[i].end || !explain::same_target(a[i].target, b[i].target)) {
      return false;
    }
  }
  return true;
}

std::string random_word(std::mt19937& rng, std::size_t max_len) {
  static const std::u32string alphabet = U"abcé_ ";
  std::uniform_int_distribution<std::size_t> len(0, max_len), pick(0, alphabet.size() - 1);
  std::u32string w;
  for (std::size_t n = len(rng); n > 0; --n) w.push_back(alphabet[pick(rng)]);
  std::string out;
  for (char32_t c : w) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

}  // namespace

TEST(Similarity, AirportCodeAgainstRecursionOracle) {
  const std::size_t oracle = testkit::edit_distance_by_recursion(U"airport cod", U"airport code");
  EXPECT_EQ(oracle, 1u);
  EXPECT_EQ(link::levenshtein("airport cod", "airport code"), oracle);
  EXPECT_NEAR(link::similarity("airport cod", "airport_code"), 1.0 - 1.0 / 12.0, 1e-9);
  EXPECT_GE(link::similarity("airport cod", "airport_code"), link::kDefaultMinSimilarity);
}

TEST(Similarity, DynamicProgrammingMatchesRecursion) {
  std::mt19937 rng(7);
  for (int i = 0; i < 400; ++i) {
    const std::string a = random_word(rng, 6), b = random_word(rng, 6);
    EXPECT_EQ(link::levenshtein(a, b),
              testkit::edit_distance_by_recursion(util::decode(a), util::decode(b)))
        << a << " / " << b;
  }
}

TEST(Similarity, EdgeCases) {
  EXPECT_DOUBLE_EQ(link::similarity("", ""), 1.0);
  EXPECT_DOUBLE_EQ(link::similarity("Airport_Code", "airport code"), 1.0);
  EXPECT_DOUBLE_EQ(link::similarity("abc", ""), 0.0);
  EXPECT_EQ(link::levenshtein("é", "e"), 1u);
}

TEST(Linker, ScenarioEntities) {
  const auto s = scenario();
  const auto links = link::build_links(s.plan, s.schema);
  bool flight = false, travel = false, month = false, destination = false, code = false, name = false, sub = false;
  for (const auto& e : links.entries()) {
    if (auto* t = std::get_if<TableTarget>(&e.span.target)) {
      flight |= t->table == "flight";
      travel |= t->table == "travel";
    } else if (auto* c = std::get_if<ColumnTarget>(&e.span.target)) {
      month |= c->column == "month";
      destination |= c->column == "destination";
      code |= c->column == "airport_code";
      name |= c->column == "airport_name";
    } else if (auto* r = std::get_if<SubqueryResultTarget>(&e.span.target)) {
      sub |= r->unit_index == 0;
    }
  }
  EXPECT_TRUE(flight && travel && month && destination && code && name && sub);
  EXPECT_EQ(links.steps().size(), 10u);
  EXPECT_FALSE(links.schema_index().empty());
  EXPECT_TRUE(links.schema_index().count("airport code"));
}

TEST(Linker, EmptyPlan) {
  const auto links = link::build_links(explain::ExplanationPlan{}, sql::Schema{});
  EXPECT_TRUE(links.entries().empty());
  EXPECT_TRUE(links.steps().empty());
}

TEST(Linker, FirstCorpusQueryEntryCount) {
  const auto tasks = testkit::corpus_tasks();
  const auto l = load(tasks.front().db_path, tasks.front().query);
  EXPECT_EQ(link::build_links(l.plan, l.schema).entries().size(), 4u);
}

TEST(Linker, AddedConstraintSentence) {
  const auto s = scenario();
  link::RelinkOptions options;
  options.unit_index = 0;
  const std::string text = "Make sure the year in 2022.";
  const auto spans = link::relink_step(text, s.schema, s.plan, options);
  std::vector<explain::EntitySpan> columns;
  for (const auto& sp : spans) {
    if (std::holds_alternative<ColumnTarget>(sp.target)) columns.push_back(sp);
  }
  ASSERT_EQ(columns.size(), 1u);
  EXPECT_EQ(util::substr_codepoints(text, columns[0].start, columns[0].end), "year");
  EXPECT_EQ(std::get<ColumnTarget>(columns[0].target).table, "flight");
}

TEST(Linker, FuzzyMisspelling) {
  const auto s = scenario();
  const std::string text = "group by airport cod please";
  const auto spans = link::fuzzy_link(text, s.schema, {"travel"});
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(util::substr_codepoints(text, spans[0].start, spans[0].end), "airport cod");
  const auto& c = std::get<ColumnTarget>(spans[0].target);
  EXPECT_EQ(c.column, "airport_code");
  EXPECT_TRUE(link::fuzzy_link("the cat sat on 2022", s.schema, {"travel"}).empty());
}

TEST(Linker, IdentityRelinkOverCorpus) {
  std::size_t steps = 0;
  for (const auto& task : testkit::corpus_tasks()) {
    const auto l = load(task.db_path, task.query);
    for (const auto& block : l.plan.blocks) {
      for (const auto& step : block.steps) {
        link::RelinkOptions options;
        options.unit_index = block.unit_index;
        EXPECT_TRUE(same_spans(link::relink_step(step.text, l.schema, l.plan, options), step.spans))
            << task.name << ": " << step.text;
        ++steps;
      }
    }
  }
  EXPECT_GT(steps, 30u);
}

TEST(Hover, AirportCodeResolvesToColumn) {
  const auto s = scenario();
  const auto links = link::build_links(s.plan, s.schema);
  const auto& step = s.plan.blocks[1].steps[2];
  const auto at = step.text.find("airport code");
  ASSERT_NE(at, std::string::npos);
  const auto hit = link::resolve_hover(links, {1, 3}, at + 3);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->kind, HighlightTarget::Kind::kColumn);
  EXPECT_EQ(hit->table, "travel");
  EXPECT_EQ(hit->column, "airport_code");
}

TEST(Hover, PlainWordAndUnknownStep) {
  const auto s = scenario();
  const auto links = link::build_links(s.plan, s.schema);
  const auto at = s.plan.blocks[1].steps[3].text.find("records");
  EXPECT_FALSE(link::resolve_hover(links, {1, 4}, at).has_value());
  EXPECT_FALSE(link::resolve_hover(links, {1, 4}, 10000).has_value());
  EXPECT_THROW(link::resolve_hover(links, {1, 9}, 0), link::UnknownStep);
  EXPECT_THROW(link::resolve_hover(links, {5, 1}, 0), link::UnknownStep);
}

TEST(Hover, SubqueryResultTarget) {
  const auto s = scenario();
  const auto links = link::build_links(s.plan, s.schema);
  const auto at = s.plan.blocks[1].steps[1].text.find("the result of");
  const auto hit = link::resolve_hover(links, {1, 2}, at);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->kind, HighlightTarget::Kind::kSubqueryResult);
  EXPECT_EQ(hit->unit_index, 0u);
  EXPECT_EQ(link::to_json(*hit), nlohmann::json::parse(R"({"kind":"subquery_result","unit_index":0})"));
}

// Every code point of every step: inside a span the hover gives that span's
// target, outside it gives none.
TEST(Hover, ExhaustiveSweepOverCorpus) {
  auto tasks = testkit::corpus_tasks();
  for (const auto& task : tasks) {
    const auto l = load(task.db_path, task.query);
    const auto links = link::build_links(l.plan, l.schema);
    for (const auto& block : l.plan.blocks) {
      for (const auto& step : block.steps) {
        const StepId id{block.unit_index, step.step_index};
        const std::size_t n = util::codepoint_count(step.text);
        for (std::size_t off = 0; off <= n; ++off) {
          const explain::EntitySpan* owner = nullptr;
          for (const auto& sp : step.spans) {
            if (sp.start <= off && off < sp.end) owner = &sp;
          }
          const auto got = link::resolve_hover(links, id, off);
          if (owner == nullptr) {
            EXPECT_FALSE(got.has_value()) << task.name << " " << step.text << " @" << off;
          } else {
            EXPECT_EQ(got, link::highlight_of(owner->target)) << task.name << " " << step.text << " @" << off;
          }
        }
      }
    }
  }
}

TEST(Hover, ValueSpansHighlightTheirColumn) {
  explain::ValueTarget with_hint{sql::Literal{sql::Literal::Kind::kString, "x"}, sql::ColumnRef{"t", "a"}};
  const auto h = link::highlight_of(with_hint);
  ASSERT_TRUE(h.has_value());
  EXPECT_EQ(h->kind, HighlightTarget::Kind::kColumn);
  EXPECT_FALSE(link::highlight_of(explain::ValueTarget{}).has_value());
}

TEST(Hover, JsonRoundTrip) {
  HighlightTarget t;
  t.kind = HighlightTarget::Kind::kColumn;
  t.table = "travel";
  t.column = "airport_code";
  EXPECT_EQ(link::highlight_from_json(link::to_json(t)), t);
}

TEST(Linker, WithStepReplacesSpans) {
  const auto s = scenario();
  const auto links = link::build_links(s.plan, s.schema);
  const auto replaced = links.with_step({0, 2}, {});
  EXPECT_TRUE(replaced.spans_for({0, 2}).empty());
  EXPECT_FALSE(links.spans_for({0, 2}).empty());
  EXPECT_EQ(replaced.spans_for({1, 3}).size(), links.spans_for({1, 3}).size());
}
