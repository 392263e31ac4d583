#pragma once

#include "cgchat/matcher.hpp"

namespace cgchat {

class TooLarge : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kOracleMaxConcepts = 20;

/// Reference matcher: enumerates every |C_data|^|V| assignment and keeps
/// those satisfying the solution conditions checked literally on the
/// ConceptGraph API. Shares no code with the indexed matcher.
SolutionSet brute_force_oracle(const QueryGraph& query,
                               const ConceptGraph& data);

}  // namespace cgchat
