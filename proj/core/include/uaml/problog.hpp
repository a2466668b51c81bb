#ifndef UAML_PROBLOG_HPP_
#define UAML_PROBLOG_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "uaml/opinion.hpp"

namespace uaml::problog {

// Parameter of a probabilistic fact: a point probability or Beta(a, b).
struct FactParameter {
  bool is_beta = false;
  double p = 1.0;
  double a = 0.0;
  double b = 0.0;

  double mean() const { return is_beta ? a / (a + b) : p; }
};

struct Fact {
  std::string atom;
  FactParameter param;
  int line = 0;
};

struct Literal {
  std::string atom;
  bool negated = false;
};

struct Rule {
  std::string head;
  std::vector<Literal> body;
  int line = 0;
  int column = 0;
};

// Ground ProbLog program: probabilistic facts F, certain rules R, and the
// evaluation order of rules by stratum.  Immutable after parsing.
class GroundProgram {
 public:
  GroundProgram(std::vector<Fact> facts, std::vector<Rule> rules);

  const std::vector<Fact>& facts() const { return facts_; }
  const std::vector<Rule>& rules() const { return rules_; }

  // Atom names of the Herbrand base that occur in the program.
  const std::vector<std::string>& atoms() const { return atoms_; }
  bool has_atom(std::string_view atom) const;
  std::size_t atom_index(std::string_view atom) const;

  // Least model of F' ∪ R, evaluated stratum by stratum.  chosen[i] tells
  // whether facts()[i] is in F'.  Returns truth per atoms() entry.
  std::vector<bool> least_model(const std::vector<bool>& chosen) const;

  // Rule indices grouped by stratum, lowest first.
  const std::vector<std::vector<std::size_t>>& strata() const { return strata_; }

 private:
  struct CompiledRule {
    std::size_t head;
    std::vector<std::pair<std::size_t, bool>> body;  // (atom, negated)
  };

  std::vector<Fact> facts_;
  std::vector<Rule> rules_;
  std::vector<std::string> atoms_;
  std::vector<std::size_t> fact_atom_;
  std::vector<CompiledRule> compiled_;
  std::vector<std::vector<std::size_t>> strata_;
};

// Accepts `P::atom.`, `beta(A,B)::atom.`, `atom.` and
// `head :- lit1, ..., litn.` with `\+` negation and `%` comments.  Throws
// ParseError (syntax, non-ground terms, probabilities outside [0, 1]) or
// ParseError with kUnstratified naming a cycle through negation.
GroundProgram parse_program(std::string_view text);

struct Query {
  std::string target;
  std::vector<std::pair<std::string, bool>> evidence;
};

// P_F(F') for the world whose true probabilistic facts are exactly those
// whose atom is listed.  Requires point-valued facts.
double world_probability(const GroundProgram& prog,
                         std::span<const std::string> true_facts);
double world_probability(const GroundProgram& prog, const std::vector<bool>& chosen);

inline constexpr std::size_t kMaxUncertainFacts = 20;

// Sum of world probabilities whose least model entails the query, divided by
// the probability of the evidence when evidence is given.
double success_probability(const GroundProgram& prog, const Query& q);

struct SubjectiveSuccess {
  double mean = 0.0;
  double variance = 0.0;
  Opinion opinion = Opinion::vacuous(2);
};

// Monte-Carlo over beta-valued facts: each sample draws every beta fact,
// computes the exact success probability and the samples are moment-matched.
// Sample i uses substream (seed, i).
SubjectiveSuccess subjective_success(const GroundProgram& prog, const Query& q,
                                     std::size_t n_samples, std::uint64_t seed);

}  // namespace uaml::problog

#endif  // UAML_PROBLOG_HPP_
