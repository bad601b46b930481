#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dgp/graph.hpp"

namespace dgp {

namespace fs = std::filesystem;

ParseError::ParseError(const fs::path& file, std::size_t line, const std::string& what)
    : std::runtime_error(file.filename().string() + ":" + std::to_string(line) + ": " + what),
      file_(file),
      line_(line) {}

namespace {

struct Line {
    std::size_t number;
    std::string text;
};

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

// Non-empty lines; blank lines are only allowed at the end of the file
// unless skip_blank is set.
std::vector<Line> read_lines(const fs::path& path, bool skip_blank) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::vector<Line> lines;
    std::string text;
    std::size_t n = 0;
    std::size_t first_blank = 0;
    while (std::getline(in, text)) {
        ++n;
        if (trim(text).empty()) {
            if (first_blank == 0) first_blank = n;
            continue;
        }
        if (first_blank != 0 && !skip_blank)
            throw ParseError(path, first_blank, "unexpected blank line");
        lines.push_back({n, std::move(text)});
    }
    return lines;
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(',', start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

long long parse_int(std::string_view tok, const fs::path& file, std::size_t line) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
        throw ParseError(file, line, "non-numeric token '" + std::string(tok) + "'");
    return v;
}

double parse_real(std::string_view tok, const fs::path& file, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
        throw ParseError(file, line, "non-numeric token '" + std::string(tok) + "'");
    return v;
}

std::vector<long long> read_int_column(const fs::path& path) {
    std::vector<long long> out;
    for (const auto& l : read_lines(path, false)) {
        const auto toks = split_commas(l.text);
        if (toks.size() != 1) throw ParseError(path, l.number, "expected one integer per line");
        out.push_back(parse_int(toks[0], path, l.number));
    }
    return out;
}

// Sorted distinct values -> dense 0-based index.
std::map<long long, std::size_t> dense_remap(const std::vector<long long>& values) {
    std::set<long long> distinct(values.begin(), values.end());
    std::map<long long, std::size_t> remap;
    for (long long v : distinct) remap.emplace(v, remap.size());
    return remap;
}

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

GraphDataset parse_tu_dataset(const fs::path& dir, const std::string& name, const TuOptions& opts) {
    const auto file = [&](const char* suffix) { return dir / (name + suffix); };
    const fs::path a_path = file("_A.txt");
    const fs::path ind_path = file("_graph_indicator.txt");
    const fs::path lab_path = file("_graph_labels.txt");
    for (const auto& p : {a_path, ind_path, lab_path})
        if (!fs::exists(p)) throw ParseError(p, 0, "missing required file");

    const auto graph_labels = read_int_column(lab_path);
    const std::size_t graph_count = graph_labels.size();

    const auto indicator_lines = read_lines(ind_path, false);
    const std::size_t node_total = indicator_lines.size();
    std::vector<std::size_t> graph_of(node_total), local_of(node_total);
    std::vector<std::size_t> nodes_in(graph_count, 0);
    for (std::size_t k = 0; k < node_total; ++k) {
        const auto& l = indicator_lines[k];
        const auto toks = split_commas(l.text);
        if (toks.size() != 1) throw ParseError(ind_path, l.number, "expected one integer per line");
        const long long gid = parse_int(toks[0], ind_path, l.number);
        if (gid < 1 || static_cast<std::size_t>(gid) > graph_count)
            throw ParseError(ind_path, l.number, "graph id " + std::to_string(gid) + " out of range");
        graph_of[k] = static_cast<std::size_t>(gid - 1);
        local_of[k] = nodes_in[graph_of[k]]++;
    }

    GraphDataset ds;
    ds.name = name;
    ds.graphs.resize(graph_count);
    const auto label_map = dense_remap(graph_labels);
    ds.class_count = std::max<std::size_t>(label_map.size(), 1);
    for (std::size_t g = 0; g < graph_count; ++g) {
        ds.graphs[g].graph.node_count = nodes_in[g];
        ds.graphs[g].label = label_map.at(graph_labels[g]);
    }

    for (const auto& l : read_lines(a_path, true)) {
        const auto toks = split_commas(l.text);
        if (toks.size() != 2) throw ParseError(a_path, l.number, "expected 'i, j'");
        const long long i = parse_int(toks[0], a_path, l.number);
        const long long j = parse_int(toks[1], a_path, l.number);
        for (long long v : {i, j})
            if (v < 1 || static_cast<std::size_t>(v) > node_total)
                throw ParseError(a_path, l.number, "node " + std::to_string(v) + " not in indicator");
        const auto gi = graph_of[i - 1], gj = graph_of[j - 1];
        if (gi != gj)
            throw ParseError(a_path, l.number, "edge crosses graphs " + std::to_string(gi + 1) +
                                                   " and " + std::to_string(gj + 1));
        ds.graphs[gi].graph.edges.push_back({local_of[i - 1], local_of[j - 1]});
    }

    // Feature blocks: one-hot node labels, then raw attributes.
    std::vector<std::vector<double>> rows(node_total);
    std::size_t dim = 0;
    const fs::path nl_path = file("_node_labels.txt");
    if (fs::exists(nl_path)) {
        const auto labels = read_int_column(nl_path);
        if (labels.size() != node_total)
            throw ParseError(nl_path, labels.size(), "node label count differs from indicator");
        const auto remap = dense_remap(labels);
        for (std::size_t k = 0; k < node_total; ++k) {
            rows[k].assign(remap.size(), 0.0);
            rows[k][remap.at(labels[k])] = 1.0;
        }
        dim += remap.size();
    }
    const fs::path at_path = file("_node_attributes.txt");
    if (fs::exists(at_path)) {
        const auto lines = read_lines(at_path, false);
        if (lines.size() != node_total)
            throw ParseError(at_path, lines.size(), "attribute row count differs from indicator");
        std::size_t width = 0;
        for (std::size_t k = 0; k < node_total; ++k) {
            const auto toks = split_commas(lines[k].text);
            if (k == 0) width = toks.size();
            if (toks.size() != width)
                throw ParseError(at_path, lines[k].number, "inconsistent attribute width");
            for (auto t : toks) rows[k].push_back(parse_real(t, at_path, lines[k].number));
        }
        dim += width;
    }
    if (dim == 0) {
        dim = 1;
        for (auto& r : rows) r.assign(1, 1.0);
    }
    ds.feature_dim = dim;
    for (auto& lg : ds.graphs) lg.graph.features = Tensor(lg.graph.node_count, dim);
    for (std::size_t k = 0; k < node_total; ++k) {
        auto& f = ds.graphs[graph_of[k]].graph.features;
        std::copy(rows[k].begin(), rows[k].end(), f.row_span(local_of[k]).begin());
    }

    if (opts.symmetrize) {
        for (auto& lg : ds.graphs) {
            auto& edges = lg.graph.edges;
            std::set<std::pair<std::size_t, std::size_t>> present;
            for (const auto& e : edges) present.emplace(e.src, e.dst);
            const std::size_t n = edges.size();
            for (std::size_t k = 0; k < n; ++k) {
                const Edge rev{edges[k].dst, edges[k].src};
                if (present.emplace(rev.src, rev.dst).second) edges.push_back(rev);
            }
        }
    }
    return ds;
}

void write_tu_dataset(const GraphDataset& ds, const fs::path& dir) {
    fs::create_directories(dir);
    const auto open = [&](const char* suffix) {
        std::ofstream out(dir / (ds.name + suffix));
        if (!out) throw std::runtime_error("cannot write " + (dir / (ds.name + suffix)).string());
        return out;
    };
    auto a = open("_A.txt");
    auto ind = open("_graph_indicator.txt");
    auto lab = open("_graph_labels.txt");
    auto attr = open("_node_attributes.txt");
    std::size_t offset = 0;
    for (std::size_t g = 0; g < ds.graphs.size(); ++g) {
        const auto& graph = ds.graphs[g].graph;
        for (const auto& e : graph.edges) a << offset + e.src + 1 << ", " << offset + e.dst + 1 << '\n';
        for (std::size_t i = 0; i < graph.node_count; ++i) {
            ind << g + 1 << '\n';
            for (std::size_t j = 0; j < graph.feature_dim(); ++j)
                attr << (j ? ", " : "") << format_real(graph.features(i, j));
            attr << '\n';
        }
        lab << ds.graphs[g].label << '\n';
        offset += graph.node_count;
    }
}

}  // namespace dgp
