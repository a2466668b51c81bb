#include "uaml/problog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "uaml/error.hpp"
#include "uaml/random.hpp"

namespace uaml::problog {

namespace {

// --- parsing ----------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  void parse(std::vector<Fact>& facts, std::vector<Rule>& rules) {
    for (;;) {
      skip_space();
      if (at_end()) return;
      parse_clause(facts, rules);
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg,
                         ErrorCode code = ErrorCode::kSyntax) const {
    throw ParseError(code, msg, line_, column_);
  }

  [[noreturn]] void fail_at(const std::string& msg, int line, int column,
                            ErrorCode code = ErrorCode::kSyntax) const {
    throw ParseError(code, msg, line, column);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (!at_end()) {
      const char c = peek();
      if (c == '%') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) != token) return false;
    for (std::size_t i = 0; i < token.size(); ++i) advance();
    return true;
  }

  void expect(std::string_view token) {
    if (!accept(token)) {
      fail("expected '" + std::string(token) + "'" + found());
    }
  }

  std::string found() const {
    if (at_end()) return " but reached end of input";
    return std::string(" but found '") + peek() + "'";
  }

  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  // Returns true if the upcoming text is a number.
  bool number_ahead() {
    skip_space();
    const char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) ||
           (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) ||
           ((c == '-' || c == '+') &&
            (std::isdigit(static_cast<unsigned char>(peek(1))) || peek(1) == '.'));
  }

  double parse_number() {
    skip_space();
    const std::size_t start = pos_;
    if (peek() == '-' || peek() == '+') advance();
    while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    // A '.' is a decimal point only if a digit follows; otherwise it ends the
    // clause.
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      advance();
      if (peek() == '-' || peek() == '+') advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    const std::string token(text_.substr(start, pos_ - start));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      fail("malformed number '" + token + "'");
    }
    return value;
  }

  std::string parse_identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (!at_end() && is_ident_char(peek())) advance();
    return std::string(text_.substr(start, pos_ - start));
  }

  // A ground term: constant, number, quoted constant or compound.
  std::string parse_term() {
    skip_space();
    const int line = line_;
    const int column = column_;
    if (number_ahead()) {
      const std::size_t start = pos_;
      parse_number();
      return std::string(text_.substr(start, pos_ - start));
    }
    if (peek() == '\'' || peek() == '"') {
      const char quote = peek();
      const std::size_t start = pos_;
      advance();
      while (!at_end() && peek() != quote && peek() != '\n') advance();
      if (peek() != quote) fail("unterminated quoted constant");
      advance();
      return std::string(text_.substr(start, pos_ - start));
    }
    const char c = peek();
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      const std::string var = parse_identifier();
      fail_at("non-ground term: variable '" + var +
                  "' (only ground programs are supported)",
              line, column);
    }
    if (!std::islower(static_cast<unsigned char>(c))) fail("expected a term" + found());
    std::string name = parse_identifier();
    if (peek() == '(') name += parse_arguments();
    return name;
  }

  std::string parse_arguments() {
    expect("(");
    std::string out = "(";
    out += parse_term();
    while (accept(",")) out += "," + parse_term();
    expect(")");
    return out + ")";
  }

  std::string parse_atom() {
    skip_space();
    const int line = line_;
    const int column = column_;
    const char c = peek();
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      const std::string var = parse_identifier();
      fail_at("non-ground atom: variable '" + var + "'", line, column);
    }
    if (!std::islower(static_cast<unsigned char>(c))) fail("expected an atom" + found());
    std::string atom = parse_identifier();
    if (peek() == '(') atom += parse_arguments();
    return atom;
  }

  void parse_clause(std::vector<Fact>& facts, std::vector<Rule>& rules) {
    const int line = line_;
    const int column = column_;
    std::optional<FactParameter> param;
    if (number_ahead()) {
      const int pl = line_;
      const int pc = column_;
      const double p = parse_number();
      if (!(p >= 0.0 && p <= 1.0)) {
        fail_at("probability outside [0, 1]: " + std::to_string(p), pl, pc,
                ErrorCode::kInvalidProbability);
      }
      expect("::");
      param = FactParameter{false, p, 0.0, 0.0};
    } else if (text_.substr(pos_, 5) == "beta(") {
      const int pl = line_;
      const int pc = column_;
      for (int i = 0; i < 5; ++i) advance();
      const double a = parse_number();
      expect(",");
      const double b = parse_number();
      expect(")");
      if (!(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b))) {
        fail_at("beta parameters must be positive", pl, pc,
                ErrorCode::kInvalidProbability);
      }
      expect("::");
      param = FactParameter{true, a / (a + b), a, b};
    }
    const std::string head = parse_atom();
    if (accept(":-")) {
      if (param) {
        fail_at("probabilistic rules are not supported; conjoin a fresh "
                "probabilistic fact to the body instead",
                line, column);
      }
      Rule rule{head, {}, line, column};
      do {
        Literal lit;
        if (accept("\\+")) lit.negated = true;
        lit.atom = parse_atom();
        rule.body.push_back(std::move(lit));
      } while (accept(","));
      expect(".");
      rules.push_back(std::move(rule));
      return;
    }
    expect(".");
    facts.push_back({head, param.value_or(FactParameter{false, 1.0, 0.0, 0.0}), line});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

std::string predicate_of(const std::string& atom) {
  const std::size_t open = atom.find('(');
  if (open == std::string::npos) return atom + "/0";
  int depth = 0;
  int arity = 1;
  for (std::size_t i = open; i < atom.size(); ++i) {
    if (atom[i] == '(') ++depth;
    if (atom[i] == ')') --depth;
    if (atom[i] == ',' && depth == 1) ++arity;
  }
  return atom.substr(0, open) + "/" + std::to_string(arity);
}

// Tarjan's strongly connected components; components come out in reverse
// topological order of the condensation.
std::vector<std::vector<std::size_t>> strongly_connected(
    const std::vector<std::vector<std::size_t>>& graph) {
  const std::size_t n = graph.size();
  std::vector<int> index(n, -1);
  std::vector<int> low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : graph[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w = 0;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      components.push_back(std::move(comp));
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) visit(v);
  }
  return components;
}

}  // namespace

// --- program ----------------------------------------------------------------

GroundProgram::GroundProgram(std::vector<Fact> facts, std::vector<Rule> rules)
    : facts_(std::move(facts)), rules_(std::move(rules)) {
  std::map<std::string, std::size_t> atom_ids;
  auto intern = [&](const std::string& atom) {
    auto [it, inserted] = atom_ids.emplace(atom, atoms_.size());
    if (inserted) atoms_.push_back(atom);
    return it->second;
  };
  for (const auto& f : facts_) fact_atom_.push_back(intern(f.atom));
  for (const auto& r : rules_) {
    CompiledRule c{intern(r.head), {}};
    for (const auto& lit : r.body) c.body.emplace_back(intern(lit.atom), lit.negated);
    compiled_.push_back(std::move(c));
  }

  // Predicate dependency graph: body predicate -> head predicate.
  std::map<std::string, std::size_t> pred_ids;
  std::vector<std::string> preds;
  auto pred = [&](const std::string& atom) {
    auto [it, inserted] = pred_ids.emplace(predicate_of(atom), preds.size());
    if (inserted) preds.push_back(it->first);
    return it->second;
  };
  for (const auto& a : atoms_) pred(a);
  std::vector<std::vector<std::size_t>> graph(preds.size());
  for (const auto& r : rules_) {
    const std::size_t h = pred(r.head);
    for (const auto& lit : r.body) graph[pred(lit.atom)].push_back(h);
  }
  const auto components = strongly_connected(graph);
  std::vector<std::size_t> component_of(preds.size());
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (std::size_t v : components[c]) component_of[v] = c;
  }

  for (const auto& r : rules_) {
    const std::size_t h = pred(r.head);
    for (const auto& lit : r.body) {
      const std::size_t b = pred(lit.atom);
      if (!lit.negated || component_of[b] != component_of[h]) continue;
      // Recover one cycle: b -> h ... -> b inside the component.
      std::vector<std::size_t> prev(preds.size(), preds.size());
      std::deque<std::size_t> queue{h};
      prev[h] = h;
      while (!queue.empty() && prev[b] == preds.size()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        for (std::size_t w : graph[v]) {
          if (component_of[w] == component_of[h] && prev[w] == preds.size()) {
            prev[w] = v;
            queue.push_back(w);
          }
        }
      }
      std::vector<std::string> path;
      if (b != h) {
        for (std::size_t v = b; v != h; v = prev[v]) path.push_back(preds[v]);
      }
      path.push_back(preds[h]);
      std::reverse(path.begin(), path.end());
      std::string cycle = preds[b] + " -\\+-> " + path.front();
      for (std::size_t i = 1; i < path.size(); ++i) cycle += " -> " + path[i];
      throw ParseError(ErrorCode::kUnstratified,
                       "program is not stratified (cycle through negation: " +
                           cycle + ")",
                       r.line, r.column);
    }
  }

  // Tarjan emits sinks first; evaluate in reverse emission order.
  strata_.resize(components.size());
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const std::size_t c = component_of[pred(rules_[i].head)];
    strata_[components.size() - 1 - c].push_back(i);
  }
  std::erase_if(strata_, [](const auto& s) { return s.empty(); });
}

bool GroundProgram::has_atom(std::string_view atom) const {
  return std::find(atoms_.begin(), atoms_.end(), atom) != atoms_.end();
}

std::size_t GroundProgram::atom_index(std::string_view atom) const {
  auto it = std::find(atoms_.begin(), atoms_.end(), atom);
  if (it == atoms_.end()) {
    throw Error(ErrorCode::kUnknownFact,
                "atom '" + std::string(atom) + "' does not occur in the program");
  }
  return static_cast<std::size_t>(it - atoms_.begin());
}

std::vector<bool> GroundProgram::least_model(const std::vector<bool>& chosen) const {
  std::vector<bool> truth(atoms_.size(), false);
  for (std::size_t f = 0; f < facts_.size(); ++f) {
    if (chosen[f]) truth[fact_atom_[f]] = true;
  }
  for (const auto& stratum : strata_) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t r : stratum) {
        const CompiledRule& rule = compiled_[r];
        if (truth[rule.head]) continue;
        const bool fires = std::all_of(
            rule.body.begin(), rule.body.end(),
            [&truth](const auto& lit) { return truth[lit.first] != lit.second; });
        if (fires) {
          truth[rule.head] = true;
          changed = true;
        }
      }
    }
  }
  return truth;
}

GroundProgram parse_program(std::string_view text) {
  std::vector<Fact> facts;
  std::vector<Rule> rules;
  Parser(text).parse(facts, rules);
  return GroundProgram(std::move(facts), std::move(rules));
}

// --- semantics --------------------------------------------------------------

namespace {

void require_point(const GroundProgram& prog) {
  for (const auto& f : prog.facts()) {
    if (f.param.is_beta) {
      throw Error(ErrorCode::kInvalidProbability,
                  "fact '" + f.atom + "' is beta-valued; use subjective_success");
    }
  }
}

// Worlds over the uncertain facts, with the query/evidence outcome of each.
struct WorldTable {
  std::vector<std::size_t> uncertain;  // fact indices
  std::vector<bool> fixed;             // truth of every fact when certain
  std::vector<unsigned char> evidence_holds;
  std::vector<unsigned char> query_and_evidence;
};

WorldTable tabulate(const GroundProgram& prog, const Query& q) {
  const std::size_t target = prog.atom_index(q.target);
  std::vector<std::pair<std::size_t, bool>> evidence;
  for (const auto& [atom, value] : q.evidence) {
    evidence.emplace_back(prog.atom_index(atom), value);
  }
  WorldTable table;
  const auto& facts = prog.facts();
  table.fixed.assign(facts.size(), false);
  for (std::size_t f = 0; f < facts.size(); ++f) {
    const auto& param = facts[f].param;
    if (param.is_beta || (param.p > 0.0 && param.p < 1.0)) {
      table.uncertain.push_back(f);
    } else {
      table.fixed[f] = param.p >= 1.0;
    }
  }
  if (table.uncertain.size() > kMaxUncertainFacts) {
    throw Error(ErrorCode::kTooLarge,
                "exact enumeration supports at most " +
                    std::to_string(kMaxUncertainFacts) + " uncertain facts, got " +
                    std::to_string(table.uncertain.size()));
  }
  const std::size_t worlds = std::size_t{1} << table.uncertain.size();
  table.evidence_holds.resize(worlds);
  table.query_and_evidence.resize(worlds);
  std::vector<bool> chosen = table.fixed;
  for (std::size_t w = 0; w < worlds; ++w) {
    for (std::size_t k = 0; k < table.uncertain.size(); ++k) {
      chosen[table.uncertain[k]] = ((w >> k) & 1U) != 0;
    }
    const auto model = prog.least_model(chosen);
    const bool ev_ok = std::all_of(evidence.begin(), evidence.end(),
                                   [&model](const auto& e) { return model[e.first] == e.second; });
    table.evidence_holds[w] = ev_ok ? 1 : 0;
    table.query_and_evidence[w] = ev_ok && model[target] ? 1 : 0;
  }
  return table;
}

// P(q ∧ E) / P(E) for one assignment of uncertain-fact probabilities.
// Returns a negative value when P(E) = 0.
double conditional(const WorldTable& table, const std::vector<double>& probs) {
  double joint = 0.0;
  double evidence = 0.0;
  const std::size_t worlds = table.evidence_holds.size();
  for (std::size_t w = 0; w < worlds; ++w) {
    if (!table.evidence_holds[w]) continue;
    double weight = 1.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      weight *= ((w >> k) & 1U) ? probs[k] : 1.0 - probs[k];
    }
    evidence += weight;
    if (table.query_and_evidence[w]) joint += weight;
  }
  if (!(evidence > 0.0)) return -1.0;
  return joint / evidence;
}

}  // namespace

double world_probability(const GroundProgram& prog, const std::vector<bool>& chosen) {
  require_point(prog);
  const auto& facts = prog.facts();
  double p = 1.0;
  for (std::size_t f = 0; f < facts.size(); ++f) {
    p *= chosen[f] ? facts[f].param.p : 1.0 - facts[f].param.p;
  }
  return p;
}

double world_probability(const GroundProgram& prog,
                         std::span<const std::string> true_facts) {
  const auto& facts = prog.facts();
  std::vector<bool> chosen(facts.size(), false);
  for (const auto& name : true_facts) {
    bool found = false;
    for (std::size_t f = 0; f < facts.size(); ++f) {
      if (facts[f].atom == name) {
        chosen[f] = true;
        found = true;
      }
    }
    if (!found) {
      throw Error(ErrorCode::kUnknownFact,
                  "'" + name + "' is not a probabilistic fact of the program");
    }
  }
  return world_probability(prog, chosen);
}

double success_probability(const GroundProgram& prog, const Query& q) {
  require_point(prog);
  const WorldTable table = tabulate(prog, q);
  std::vector<double> probs;
  for (std::size_t f : table.uncertain) probs.push_back(prog.facts()[f].param.p);
  const double p = conditional(table, probs);
  if (p < 0.0) {
    throw Error(ErrorCode::kInconsistentEvidence, "evidence has zero probability");
  }
  return p;
}

SubjectiveSuccess subjective_success(const GroundProgram& prog, const Query& q,
                                     std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) {
    throw Error(ErrorCode::kInvalidEvidence, "need at least 2 samples");
  }
  const WorldTable table = tabulate(prog, q);
  const auto& facts = prog.facts();
  std::vector<double> values(n_samples);
  std::vector<double> probs(table.uncertain.size());
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng = Rng::substream(seed, i);
    for (std::size_t k = 0; k < table.uncertain.size(); ++k) {
      const auto& param = facts[table.uncertain[k]].param;
      probs[k] = param.is_beta ? rng.beta(param.a, param.b) : param.p;
    }
    values[i] = conditional(table, probs);
    if (values[i] < 0.0) {
      throw Error(ErrorCode::kInconsistentEvidence,
                  "evidence has zero probability under a sampled world distribution");
    }
  }
  SubjectiveSuccess out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(n_samples);
  for (double v : values) out.variance += (v - out.mean) * (v - out.mean);
  out.variance /= static_cast<double>(n_samples - 1);
  out.opinion = moment_fit(out.mean, out.variance).opinion;
  return out;
}

}  // namespace uaml::problog
