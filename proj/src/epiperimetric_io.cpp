#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qfreq/epiperimetric.hpp"

namespace qfreq {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& tok) {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size() || !std::isfinite(v))
        throw std::runtime_error("bad numeric token '" + tok + "'");
    return v;
}

}  // namespace

// Format:
//   partition <n_arcs>
//   arc <start> <end> <sign> <n_sheets> <n_samples>
//   <n_samples values>            (one line per sheet)
void write_partition(const std::string& path, const BoundaryPartition& bp) {
    if (bp.arcs.size() != bp.traces.size())
        throw std::runtime_error("write_partition: arc and trace counts differ");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << "partition " << bp.arcs.size() << "\n";
    for (std::size_t i = 0; i < bp.arcs.size(); ++i) {
        const Arc& a = bp.arcs[i];
        const auto& sheets = bp.traces[i];
        const std::size_t samples = sheets.empty() ? 0 : sheets.front().size();
        os << "arc " << fmt(a.start) << ' ' << fmt(a.end) << ' ' << (a.sign > 0 ? "+1" : "-1")
           << ' ' << sheets.size() << ' ' << samples << "\n";
        for (const auto& s : sheets) {
            if (s.size() != samples) throw std::runtime_error("write_partition: ragged sheets");
            for (std::size_t j = 0; j < s.size(); ++j) os << (j ? " " : "") << fmt(s[j]);
            os << "\n";
        }
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

BoundaryPartition read_partition(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for read: " + path);
    std::string line, tag;
    if (!std::getline(is, line)) throw std::runtime_error("empty partition stream");
    std::istringstream head(line);
    std::size_t n_arcs = 0;
    if (!(head >> tag >> n_arcs) || tag != "partition")
        throw std::runtime_error("bad partition header: " + line);
    BoundaryPartition bp;
    for (std::size_t i = 0; i < n_arcs; ++i) {
        if (!std::getline(is, line)) throw std::runtime_error("partition stream truncated");
        std::istringstream ah(line);
        std::string s0, s1, sg;
        std::size_t n_sheets = 0, n_samples = 0;
        if (!(ah >> tag >> s0 >> s1 >> sg >> n_sheets >> n_samples) || tag != "arc")
            throw std::runtime_error("bad arc header: " + line);
        Arc arc;
        arc.start = parse_double(s0);
        arc.end = parse_double(s1);
        if (sg == "+1")
            arc.sign = +1;
        else if (sg == "-1")
            arc.sign = -1;
        else
            throw std::runtime_error("bad arc sign: " + sg);
        std::vector<std::vector<double>> sheets;
        for (std::size_t s = 0; s < n_sheets; ++s) {
            if (!std::getline(is, line)) throw std::runtime_error("partition stream truncated");
            std::istringstream row(line);
            std::vector<double> vals;
            std::string tok;
            while (row >> tok) vals.push_back(parse_double(tok));
            if (vals.size() != n_samples)
                throw std::runtime_error("sheet sample count mismatch: " + line);
            sheets.push_back(std::move(vals));
        }
        bp.arcs.push_back(arc);
        bp.traces.push_back(std::move(sheets));
    }
    return bp;
}

}  // namespace qfreq
