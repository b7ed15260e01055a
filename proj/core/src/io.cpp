#include "mfglab/io.hpp"

#include "mfglab/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mfglab::io {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json to_json(const Prism& prism) {
    return {{"a", prism.a}, {"b", prism.b}, {"half_widths", prism.half_widths}, {"T", prism.T}};
}

Prism prism_from_json(const nlohmann::json& j) {
    Prism p;
    p.a = j.at("a").get<double>();
    p.b = j.at("b").get<double>();
    p.half_widths = j.value("half_widths", std::vector<double>{});
    p.T = j.at("T").get<double>();
    p.validate();
    return p;
}

nlohmann::json to_json(const Grid& grid) {
    return {{"prism", to_json(grid.prism())},
            {"nx", grid.nx()},
            {"nt", grid.nt()},
            {"h", grid.h()},
            {"tau", grid.tau()}};
}

GridPtr grid_from_json(const nlohmann::json& j) {
    return make_grid(prism_from_json(j.at("prism")), j.at("nx").get<std::vector<std::size_t>>(),
                     j.at("nt").get<std::size_t>());
}

namespace {

void write_header(std::ostream& os, std::size_t axes, bool with_t) {
    for (std::size_t k = 0; k < axes; ++k) os << 'i' << k + 1 << ',';
    if (with_t) os << "it,";
    os << "value\n";
}

void write_rows(std::ostream& os, std::span<const double> values, const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> idx(dims.size(), 0);
    for (double v : values) {
        for (std::size_t i : idx) os << i << ',';
        os << format_double(v) << '\n';
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (++idx[k] < dims[k]) break;
            idx[k] = 0;
        }
    }
}

std::vector<double> read_values(std::istream& is, std::size_t index_columns, std::size_t expected) {
    std::string line;
    if (!std::getline(is, line)) fail(ErrorKind::InvalidArgument, "csv: missing header");
    std::vector<double> out;
    out.reserve(expected);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t pos = 0;
        for (std::size_t c = 0; c < index_columns; ++c) {
            pos = line.find(',', pos);
            if (pos == std::string::npos) fail(ErrorKind::InvalidArgument, "csv: short row");
            ++pos;
        }
        out.push_back(std::stod(line.substr(pos)));
    }
    if (out.size() != expected) fail(ErrorKind::GridMismatch, "csv: row count does not match grid");
    return out;
}

}  // namespace

void write_csv(std::ostream& os, const Field& f) {
    write_header(os, f.grid().dim(), true);
    write_rows(os, f.values(), f.grid().dims());
}

void write_csv(std::ostream& os, const SpaceField& f) {
    write_header(os, f.grid().dim(), false);
    write_rows(os, f.values(), f.grid().nx());
}

void write_csv(std::ostream& os, const BoundaryTrace& tr) {
    auto dims = tr.grid().face_dims(tr.face());
    write_header(os, dims.size(), true);
    dims.push_back(tr.grid().nt());
    write_rows(os, tr.values(), dims);
}

Field read_field_csv(std::istream& is, GridPtr grid) {
    auto v = read_values(is, grid->dim() + 1, grid->size());
    return Field(std::move(grid), std::move(v));
}

SpaceField read_space_field_csv(std::istream& is, GridPtr grid) {
    auto v = read_values(is, grid->dim(), grid->space_size());
    return SpaceField(std::move(grid), std::move(v));
}

BoundaryTrace read_trace_csv(std::istream& is, GridPtr grid, const Face& face) {
    const auto tangential = grid->face_dims(face);
    std::size_t count = grid->nt();
    for (std::size_t d : tangential) count *= d;
    auto v = read_values(is, tangential.size() + 1, count);
    return BoundaryTrace(std::move(grid), face, std::move(v));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorKind::InvalidArgument, "cannot open " + path.string() + " for writing");
    os << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::InvalidArgument, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::InvalidArgument, path.string() + ": " + e.what());
    }
}

template <class T>
void write_csv_file(const std::filesystem::path& path, const T& value) {
    std::ostringstream os;
    write_csv(os, value);
    write_file(path, os.str());
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::InvalidArgument, "cannot open " + path.string());
    return is;
}

}  // namespace

void write_triple(const std::filesystem::path& dir, const MFGTriple& triple, const Field& f,
                  const nlohmann::json& provenance) {
    write_json(dir / "grid.json", to_json(triple.u.grid()));
    write_csv_file(dir / "u.csv", triple.u);
    write_csv_file(dir / "m.csv", triple.m);
    write_csv_file(dir / "k.csv", triple.k);
    write_csv_file(dir / "f.csv", f);
    write_json(dir / "provenance.json", provenance);
}

StoredTriple read_triple(const std::filesystem::path& dir) {
    auto grid = grid_from_json(read_json(dir / "grid.json"));
    auto read_field = [&](const char* name) {
        auto is = open_input(dir / name);
        return read_field_csv(is, grid);
    };
    auto k_in = open_input(dir / "k.csv");
    MFGTriple triple{read_field("u.csv"), read_field("m.csv"), read_space_field_csv(k_in, grid)};
    return {std::move(triple), read_field("f.csv")};
}

template void write_csv_file<Field>(const std::filesystem::path&, const Field&);
template void write_csv_file<SpaceField>(const std::filesystem::path&, const SpaceField&);
template void write_csv_file<BoundaryTrace>(const std::filesystem::path&, const BoundaryTrace&);

}  // namespace mfglab::io
