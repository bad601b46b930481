#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dgp/metrics.hpp"

namespace dgp {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<double> ScoreTable::scores(Origin origin) const {
    std::vector<double> out;
    for (const auto& r : rows)
        if (r.origin == origin) out.push_back(r.score);
    return out;
}

void ScoreTable::validate() const {
    std::set<std::string> ids;
    for (const auto& r : rows) {
        if (!ids.insert(r.graph_id).second) throw std::invalid_argument("duplicate graph id " + r.graph_id);
        if (!std::isfinite(r.score)) throw std::invalid_argument("non-finite score for " + r.graph_id);
    }
}

void write_score_csv(const ScoreTable& t, std::ostream& out) {
    out << "graph_id,origin,score,md1,md2\n";
    for (const auto& r : t.rows)
        out << r.graph_id << ',' << (r.origin == Origin::ID ? "ID" : "OOD") << ',' << format_double(r.score)
            << ',' << format_double(r.md1) << ',' << format_double(r.md2) << '\n';
}

void write_score_csv(const ScoreTable& t, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_score_csv(t, out);
}

ScoreTable read_score_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("graph_id,origin,score,md1,md2", 0) != 0)
        throw std::runtime_error(path.string() + ": missing score CSV header");
    ScoreTable t;
    std::size_t line_no = 1;
    const auto num = [&](const std::string& s) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 5) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 5 fields");
        ScoreRow r;
        r.graph_id = f[0];
        if (f[1] == "ID") r.origin = Origin::ID;
        else if (f[1] == "OOD") r.origin = Origin::OOD;
        else throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad origin '" + f[1] + "'");
        r.score = num(f[2]);
        r.md1 = num(f[3]);
        r.md2 = num(f[4]);
        t.rows.push_back(std::move(r));
    }
    t.validate();
    return t;
}

}  // namespace dgp
