#pragma once

#include "mfglab/grid.hpp"
#include "mfglab/mfg.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

namespace mfglab::io {

/// Shortest round-trip text for a double ("%.17g").
std::string format_double(double v);

nlohmann::json to_json(const Prism& prism);
Prism prism_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Grid& grid);
GridPtr grid_from_json(const nlohmann::json& j);

/// Columns: i1..in, it, value.
void write_csv(std::ostream& os, const Field& f);
/// Columns: i1..in, value.
void write_csv(std::ostream& os, const SpaceField& f);
/// Columns: tangential indices, it, value.
void write_csv(std::ostream& os, const BoundaryTrace& tr);

Field read_field_csv(std::istream& is, GridPtr grid);
SpaceField read_space_field_csv(std::istream& is, GridPtr grid);
BoundaryTrace read_trace_csv(std::istream& is, GridPtr grid, const Face& face);

void write_file(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Triple directory: grid.json, u.csv, m.csv, k.csv, f.csv and provenance.json.
void write_triple(const std::filesystem::path& dir, const MFGTriple& triple, const Field& f,
                  const nlohmann::json& provenance);

struct StoredTriple {
    MFGTriple triple;
    Field f;
};

StoredTriple read_triple(const std::filesystem::path& dir);

template <class T>
void write_csv_file(const std::filesystem::path& path, const T& value);

}  // namespace mfglab::io
