#include "scram/version.hpp"

#include "scram/error.hpp"

#include <charconv>
#include <string>
#include <vector>

namespace scram {

namespace {

std::vector<unsigned long long> components(std::string_view v)
{
    if (!is_dotted_version(v))
        throw Error("malformed dotted version '" + std::string(v) + "'");
    std::vector<unsigned long long> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        auto dot = v.find('.', pos);
        if (dot == std::string_view::npos)
            dot = v.size();
        unsigned long long n = 0;
        auto [ptr, ec] = std::from_chars(v.data() + pos, v.data() + dot, n);
        if (ec != std::errc())
            throw Error("version component out of range in '" + std::string(v) + "'");
        out.push_back(n);
        pos = dot + 1;
    }
    return out;
}

} // namespace

bool is_dotted_version(std::string_view v)
{
    if (v.empty() || v.front() == '.' || v.back() == '.')
        return false;
    char prev = '.';
    for (char c : v) {
        if (c == '.') {
            if (prev == '.')
                return false;
        } else if (c < '0' || c > '9') {
            return false;
        }
        prev = c;
    }
    return true;
}

std::strong_ordering compare_dotted(std::string_view a, std::string_view b)
{
    auto x = components(a);
    auto y = components(b);
    const auto n = std::max(x.size(), y.size());
    x.resize(n, 0);
    y.resize(n, 0);
    return x <=> y;
}

} // namespace scram
