#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qfreq/field.hpp"

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

std::string encode_qpoint(const QPoint& t) {
    std::string s(t.sign >= 0 ? "+:" : "-:");
    for (std::size_t i = 0; i < t.q(); ++i) {
        if (i) s += ',';
        s += fmt(t.values[i]);
    }
    return s;
}

QPoint decode_qpoint(const std::string& s) {
    if (s.size() < 3 || (s[0] != '+' && s[0] != '-') || s[1] != ':')
        throw std::runtime_error("bad q-point token '" + s + "'");
    std::vector<double> vals;
    std::string tok;
    std::istringstream body(s.substr(2));
    while (std::getline(body, tok, ',')) vals.push_back(parse_double(tok));
    if (vals.empty()) throw std::runtime_error("empty q-point token");
    return make_qpoint(std::move(vals), s[0] == '+' ? +1 : -1);
}

void write_field(std::ostream& os, const SampledField& u) {
    const Mesh& m = u.mesh;
    if (m.dim == 1) {
        os << "field 1 " << u.q() << " interval " << m.nx << ' ' << fmt(m.ax) << ' '
           << fmt(m.bx) << '\n';
    } else if (m.kind == MeshKind::rect) {
        os << "field 2 " << u.q() << " rect " << m.nx << ' ' << m.ny << ' ' << fmt(m.ax) << ' '
           << fmt(m.bx) << ' ' << fmt(m.ay) << ' ' << fmt(m.by) << '\n';
    } else {
        os << "field 2 " << u.q() << " disk " << m.nx << ' ' << fmt(m.cx) << ' ' << fmt(m.cy)
           << ' ' << fmt(m.radius) << '\n';
    }
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        os << fmt(m.coords[i][0]);
        if (m.dim == 2) os << ' ' << fmt(m.coords[i][1]);
        os << ' ' << encode_qpoint(u.values[i]) << '\n';
    }
}

SampledField read_field(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty field stream");
    std::istringstream head(line);
    std::string tag, kind;
    int dim = 0;
    std::size_t q = 0;
    head >> tag >> dim >> q >> kind;
    if (tag != "field" || q == 0) throw std::runtime_error("bad field header: " + line);

    SampledField u;
    if (dim == 1 && kind == "interval") {
        int n;
        double a, b;
        head >> n >> a >> b;
        if (!head) throw std::runtime_error("bad interval header");
        u.mesh = make_interval_mesh(a, b, n);
    } else if (dim == 2 && kind == "rect") {
        int nx, ny;
        double ax, bx, ay, by;
        head >> nx >> ny >> ax >> bx >> ay >> by;
        if (!head) throw std::runtime_error("bad rect header");
        u.mesh = make_rect_mesh(ax, bx, ay, by, nx, ny);
    } else if (dim == 2 && kind == "disk") {
        int n;
        double cx, cy, R;
        head >> n >> cx >> cy >> R;
        if (!head) throw std::runtime_error("bad disk header");
        u.mesh = make_disk_mesh(cx, cy, R, n);
    } else {
        throw std::runtime_error("bad field header: " + line);
    }

    u.values.reserve(u.mesh.n_nodes());
    for (std::size_t i = 0; i < u.mesh.n_nodes(); ++i) {
        if (!std::getline(is, line)) throw std::runtime_error("field stream truncated");
        std::istringstream row(line);
        double x, y = 0;
        std::string tok;
        row >> x;
        if (dim == 2) row >> y;
        row >> tok;
        if (!row) throw std::runtime_error("bad field row: " + line);
        const Vec2& want = u.mesh.coords[i];
        if (std::abs(x - want[0]) > 1e-9 || std::abs(y - want[1]) > 1e-9)
            throw std::runtime_error("field row coordinates do not match the mesh: " + line);
        QPoint t = decode_qpoint(tok);
        if (t.q() != q) throw std::runtime_error("field row has wrong Q: " + line);
        u.values.push_back(std::move(t));
    }
    return u;
}

void write_field_file(const std::string& path, const SampledField& u) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_field(os, u);
}

SampledField read_field_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for read: " + path);
    return read_field(is);
}

}  // namespace qfreq
