#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bkdv/model.hpp"

namespace fixtures {

// A[0], A[1] (ignored), A[2] .. A[r] and B as text
inline bkdv::ReducedEquation equation(const std::vector<std::string>& A, const std::string& B) {
    std::vector<bkdv::Expr> c;
    for (const auto& s : A) c.push_back(bkdv::parse_expression(s));
    c[1] = bkdv::num(0);
    return bkdv::ReducedEquation(static_cast<int>(A.size()) - 1, c, bkdv::parse_expression(B));
}

// Hand-built equations matching no catalogue normal form.
inline const std::vector<std::pair<std::vector<std::string>, std::string>>& f0_instances() {
    static const std::vector<std::pair<std::vector<std::string>, std::string>> list = {
        {{"exp(x)", "0", "1"}, "0"},    {{"0", "0", "1+x^2"}, "0"},      {{"0", "0", "1"}, "sin(x)"},
        {{"1", "0", "x^3"}, "0"},       {{"1", "0", "1"}, "x"},          {{"1", "0", "0", "1"}, "x"},
        {{"ln(x)", "0", "1"}, "0"},     {{"ln(x)", "0", "x^2"}, "0"},    {{"1", "0", "exp(x)"}, "0"},
        {{"0", "0", "1"}, "x^2"},       {{"0", "0", "1"}, "1/x"},        {{"cos(x)", "0", "1"}, "0"},
        {{"x", "0", "1"}, "0"},         {{"0", "0", "1"}, "tan(x)"},     {{"0", "0", "2+sin(x)"}, "0"},
        {{"atan(x)", "0", "1"}, "0"},   {{"1", "0", "sqrt(x)"}, "x"},    {{"0", "0", "1"}, "exp(-x^2)"},
        {{"0", "0", "x^2"}, "x^2"},     {{"0", "0", "exp(x)"}, "x"},     {{"0", "0", "1", "1"}, "x^2"},
    };
    return list;
}

}  // namespace fixtures
