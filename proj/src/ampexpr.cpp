#include "wf/ampexpr.hpp"

#include <cctype>
#include <cmath>

namespace wf {

namespace {

class Parser {
public:
    Parser(const std::string& text, std::size_t line, std::size_t col)
        : text_(text), line_(line), col0_(col) {}

    cnum parse() {
        skip_ws();
        cnum v = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing content");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, static_cast<int>(line_),
                         static_cast<int>(col0_ + pos_));
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool eat(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    cnum expr() {
        cnum v = term();
        skip_ws();
        while (pos_ < text_.size() && (text_[pos_] == '*' || text_[pos_] == '/')) {
            const char op = text_[pos_++];
            skip_ws();
            const cnum rhs = term();
            if (op == '*') {
                v *= rhs;
            } else {
                if (std::abs(rhs) == 0.0) fail("division by zero");
                v /= rhs;
            }
            skip_ws();
        }
        return v;
    }

    cnum term() {
        skip_ws();
        double sign = 1.0;
        if (eat('-')) {
            sign = -1.0;
            skip_ws();
        }
        if (pos_ >= text_.size()) fail("expected a term");
        if (text_[pos_] == 'i') {
            ++pos_;
            return cnum(0.0, sign);
        }
        if (text_.compare(pos_, 5, "sqrt(") == 0) {
            pos_ += 5;
            skip_ws();
            const double r = rational();
            skip_ws();
            if (!eat(')')) fail("expected ')' after sqrt argument");
            return sign * std::sqrt(r);
        }
        if (std::isdigit(static_cast<unsigned char>(text_[pos_])))
            return sign * rational();
        fail("expected a number, sqrt(...) or i");
    }

    double integer() {
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            fail("expected an integer");
        double v = 0.0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            v = v * 10.0 + (text_[pos_++] - '0');
        return v;
    }

    // Greedy: a '/' directly followed by a digit binds as part of the
    // rational, otherwise it is left for the expression level (same value).
    double rational() {
        const double num = integer();
        if (pos_ + 1 < text_.size() && text_[pos_] == '/' &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
            ++pos_;
            const double den = integer();
            if (den == 0.0) fail("division by zero");
            return num / den;
        }
        return num;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t line_;
    std::size_t col0_;
};

}  // namespace

AmpExpr parse_amplitude(const std::string& text, std::size_t line, std::size_t col) {
    Parser p(text, line, col);
    return {text, p.parse()};
}

}  // namespace wf
