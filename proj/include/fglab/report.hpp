#pragma once

#include <string>
#include <vector>

namespace fglab {

// verification outcome: one line per checked identity; failures are report
// entries, not exceptions
struct VerifyReport {
    struct Line {
        std::string name;
        bool pass = false;
        std::string detail;
    };
    std::vector<Line> lines;

    void add(std::string name, bool pass, std::string detail = "")
    {
        lines.push_back({std::move(name), pass, std::move(detail)});
    }

    void merge(VerifyReport const &o, std::string const &prefix = "")
    {
        for (auto const &l : o.lines)
            lines.push_back({prefix + l.name, l.pass, l.detail});
    }

    bool all_pass() const
    {
        for (auto const &l : lines)
            if (!l.pass)
                return false;
        return true;
    }

    std::string first_failure() const
    {
        for (auto const &l : lines)
            if (!l.pass)
                return l.name + (l.detail.empty() ? "" : " (" + l.detail + ")");
        return "";
    }
};

} // namespace fglab
