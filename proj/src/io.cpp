#include "cgolab/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace cgolab {

static_assert(std::endian::native == std::endian::little, "CDF1 I/O assumes a little-endian host");

json grid_to_json(const Grid& g) {
    const Domain& d = g.domain();
    const int n = d.n;
    json lo = json::array(), hi = json::array(), x0 = json::array(), nx = json::array();
    for (int a = 0; a < n; ++a) {
        lo.push_back(d.lo[a]);
        hi.push_back(d.hi[a]);
        x0.push_back(d.x0[a]);
        nx.push_back(g.nx(a));
    }
    return {{"n", n}, {"lo", lo}, {"hi", hi}, {"x0", x0}, {"T", d.T}, {"nx", nx}, {"nt", g.nt()}};
}

Grid grid_from_json(const json& j) {
    try {
        Domain d;
        d.n = j.at("n").get<int>();
        std::array<int, 3> nx{1, 1, 1};
        d.lo = d.hi = d.x0 = Vec3{0.0, 0.0, 0.0};
        for (int a = 0; a < d.n; ++a) {
            d.lo[a] = j.at("lo").at(a).get<double>();
            d.hi[a] = j.at("hi").at(a).get<double>();
            d.x0[a] = j.at("x0").at(a).get<double>();
            nx[a] = j.at("nx").at(a).get<int>();
        }
        d.T = j.at("T").get<double>();
        return Grid(d, nx, j.at("nt").get<int>());
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad grid description: ") + e.what());
    }
}

template <class T>
void write_cdf1(const std::string& path, const Field<T>& f) {
    const Grid& g = f.grid();
    json shape = json::array({g.levels()});
    for (int a = 0; a < g.dim(); ++a) shape.push_back(g.nx(a));
    json header = {{"shape", shape},
                   {"arity", f.arity()},
                   {"dtype", is_complex<T>::value ? "c128" : "f64"},
                   {"order", "row-major"},
                   {"grid", grid_to_json(g)}};
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out.write("CDF1", 4);
    const std::uint32_t len = static_cast<std::uint32_t>(text.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));

    std::vector<T> buf(static_cast<std::size_t>(f.arity()));
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            for (int c = 0; c < f.arity(); ++c) buf[c] = f(k, s, c);
            out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(T)));
        }
    }
    if (!out) throw Error("write to '" + path + "' failed");
}

namespace {

json read_header(std::ifstream& in, const std::string& path) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "CDF1", 4) != 0) throw FormatError("'" + path + "' is not a CDF1 file");
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 4);
    if (!in || len > (1u << 24)) throw FormatError("'" + path + "': bad header length");
    std::string text(len, '\0');
    in.read(text.data(), len);
    if (!in) throw FormatError("'" + path + "': truncated header");
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError("'" + path + "': header is not JSON: " + e.what());
    }
}

template <class T>
Field<T> read_payload(const std::string& path, const char* dtype) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    json h = read_header(in, path);
    if (h.value("dtype", "") != dtype) throw FormatError("'" + path + "': expected dtype " + std::string(dtype));
    if (h.value("order", "") != "row-major") throw FormatError("'" + path + "': only row-major order is supported");
    Grid g = grid_from_json(h.at("grid"));
    const int arity = h.at("arity").get<int>();
    const auto& shape = h.at("shape");
    if (shape.size() != static_cast<std::size_t>(g.dim() + 1) || shape[0].get<int>() != g.levels()) {
        throw FormatError("'" + path + "': shape does not match grid");
    }
    for (int a = 0; a < g.dim(); ++a) {
        if (shape[a + 1].get<int>() != g.nx(a)) throw FormatError("'" + path + "': shape does not match grid");
    }
    Field<T> f(g, arity);
    std::vector<T> buf(static_cast<std::size_t>(arity));
    for (int k = 0; k < g.levels(); ++k) {
        for (std::size_t s = 0; s < g.spatial_size(); ++s) {
            in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(T)));
            if (!in) throw FormatError("'" + path + "': truncated payload");
            for (int c = 0; c < arity; ++c) f(k, s, c) = buf[c];
        }
    }
    if (!f.all_finite()) throw FormatError("'" + path + "': non-finite values");
    return f;
}

}  // namespace

json read_cdf1_header(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_header(in, path);
}

RealField read_cdf1_real(const std::string& path) { return read_payload<double>(path, "f64"); }
ComplexField read_cdf1_complex(const std::string& path) { return read_payload<Complex>(path, "c128"); }

template void write_cdf1<double>(const std::string&, const Field<double>&);
template void write_cdf1<Complex>(const std::string&, const Field<Complex>&);

}  // namespace cgolab
