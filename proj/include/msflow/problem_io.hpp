#pragma once

#include <iosfwd>
#include <string>

#include "msflow/problem.hpp"

namespace msflow {

/// Reads the INI-style problem format (see README). Throws ParseError.
MorseSturmProblem parse_problem(std::istream& in);
MorseSturmProblem parse_problem_string(const std::string& text);
MorseSturmProblem load_problem(const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace msflow
