#pragma once

#include <string>

#include "wf/common.hpp"

namespace wf {

// Exact amplitude expression, grammar:
//   expr     := term (('*' | '/') term)*
//   term     := ['-'] (rational | 'sqrt(' rational ')' | 'i')
//   rational := int ['/' int]
// The source text is kept so scenarios serialize without float literals.
struct AmpExpr {
    std::string text;
    cnum value;
};

// Parses the whole string; trailing content is an error. line/col locate the
// text inside an enclosing document for error reporting.
AmpExpr parse_amplitude(const std::string& text, std::size_t line = 1, std::size_t col = 1);

}  // namespace wf
