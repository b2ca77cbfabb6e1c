#include "hvlab/angle_expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hvlab/geometry.hpp"

namespace hvlab {
namespace {

// Recursive descent over: expr := term (('+'|'-') term)*
//                         term := unary (('*'|'/') unary | unary)*
//                         unary := ('+'|'-') unary | atom
//                         atom := number | "pi" | '(' expr ')'
class AngleParser
{
  public:
    explicit AngleParser(std::string_view text) : text_(text) {}

    double parse()
    {
        double const v = expr();
        skip_space();
        if (pos_ != text_.size())
        {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
        if (!std::isfinite(v))
        {
            fail("value is not finite");
        }
        return v;
    }

  private:
    [[noreturn]] void fail(std::string const& why) const
    {
        throw std::invalid_argument("bad angle '" + std::string(text_) + "': " + why);
    }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
        {
            ++pos_;
        }
    }

    char peek()
    {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool starts_atom()
    {
        char const c = peek();
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '(' || c == 'p';
    }

    double expr()
    {
        double v = term();
        for (char c = peek(); c == '+' || c == '-'; c = peek())
        {
            ++pos_;
            double const rhs = term();
            v = c == '+' ? v + rhs : v - rhs;
        }
        return v;
    }

    double term()
    {
        double v = unary();
        for (;;)
        {
            char const c = peek();
            if (c == '*' || c == '/')
            {
                ++pos_;
                double const rhs = unary();
                v = c == '*' ? v * rhs : v / rhs;
            }
            else if (starts_atom())
            {
                v *= atom();  // implicit product, as in "3pi"
            }
            else
            {
                return v;
            }
        }
    }

    double unary()
    {
        char const c = peek();
        if (c == '-' || c == '+')
        {
            ++pos_;
            double const v = unary();
            return c == '-' ? -v : v;
        }
        return atom();
    }

    double atom()
    {
        char const c = peek();
        if (c == '(')
        {
            ++pos_;
            double const v = expr();
            if (peek() != ')')
            {
                fail("missing ')'");
            }
            ++pos_;
            return v;
        }
        if (text_.substr(pos_).starts_with("pi"))
        {
            pos_ += 2;
            return kPi;
        }
        double v = 0.0;
        auto const* begin = text_.data() + pos_;
        auto const [end, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
        if (ec != std::errc() || end == begin)
        {
            fail("expected a number, 'pi' or '('");
        }
        pos_ += static_cast<std::size_t>(end - begin);
        return v;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

double parse_angle(std::string_view text)
{
    return AngleParser(text).parse();
}

std::vector<double> parse_angle_grid(std::string_view text)
{
    auto const first = text.find(':');
    auto const second = first == std::string_view::npos ? first : text.find(':', first + 1);
    if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos)
    {
        throw std::invalid_argument("bad grid '" + std::string(text) + "': expected lo:hi:n");
    }
    double const lo = parse_angle(text.substr(0, first));
    double const hi = parse_angle(text.substr(first + 1, second - first - 1));
    auto const count_text = text.substr(second + 1);
    long long n = 0;
    auto const [end, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), n);
    if (ec != std::errc() || end != count_text.data() + count_text.size() || n < 1)
    {
        throw std::invalid_argument("bad grid '" + std::string(text) + "': n must be a positive integer");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i)
    {
        out.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    if (n > 1)
    {
        out.back() = hi;
    }
    return out;
}

}  // namespace hvlab
