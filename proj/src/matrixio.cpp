#include "seed/matrixio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "seed/errors.hpp"

namespace seed {

namespace {

void put_u32_le(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {
        static_cast<char>(v & 0xff),
        static_cast<char>((v >> 8) & 0xff),
        static_cast<char>((v >> 16) & 0xff),
        static_cast<char>((v >> 24) & 0xff),
    };
    out.write(bytes, 4);
}

std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void check_write(const std::ostream& out, std::size_t offset) {
    if (!out) {
        throw IoError("write failure at byte offset " + std::to_string(offset));
    }
}

}  // namespace

void write_matrix(const DenseMatrix& m, std::ostream& out) {
    if (!m.shape_consistent()) {
        throw ValidationError("matrix data length does not match rows*cols");
    }
    require_finite(m, "write_matrix");
    if (m.rows > std::numeric_limits<std::uint32_t>::max() ||
        m.cols > std::numeric_limits<std::uint32_t>::max()) {
        throw ValidationError("matrix dimensions exceed uint32 range");
    }

    std::size_t offset = 0;
    out.write(kMatrixMagic, sizeof(kMatrixMagic));
    check_write(out, offset);
    offset += sizeof(kMatrixMagic);

    put_u32_le(out, static_cast<std::uint32_t>(m.rows));
    check_write(out, offset);
    offset += 4;
    put_u32_le(out, static_cast<std::uint32_t>(m.cols));
    check_write(out, offset);
    offset += 4;

    for (float v : m.values) {
        const auto bits = std::bit_cast<std::uint32_t>(v);
        put_u32_le(out, bits);
        check_write(out, offset);
        offset += 4;
    }
    out.flush();
    check_write(out, offset);
}

DenseMatrix read_matrix(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (in.gcount() != 8 || std::memcmp(magic, kMatrixMagic, 8) != 0) {
        throw FormatError("bad magic: expected SEEDMAT1");
    }

    unsigned char header[8];
    in.read(reinterpret_cast<char*>(header), 8);
    if (in.gcount() != 8) {
        throw FormatError("truncated header: expected 8 dimension bytes, found " +
                          std::to_string(in.gcount()));
    }
    const std::uint32_t rows = get_u32_le(header);
    const std::uint32_t cols = get_u32_le(header + 4);

    const std::size_t count = static_cast<std::size_t>(rows) * cols;
    const std::size_t payload_bytes = count * 4;
    std::vector<unsigned char> payload(payload_bytes);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload_bytes));
    const std::size_t got = static_cast<std::size_t>(in.gcount());
    if (got != payload_bytes) {
        throw FormatError("truncated payload: expected " + std::to_string(payload_bytes) +
                          " bytes, found " + std::to_string(got));
    }

    DenseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        m.values[i] = std::bit_cast<float>(get_u32_le(payload.data() + i * 4));
    }
    require_finite(m, "read_matrix");
    return m;
}

DenseMatrix read_csv_matrix(std::istream& in) {
    DenseMatrix m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::size_t fields = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p <= end) {
            const char* comma = std::find(p, end, ',');
            // trim surrounding spaces
            const char* a = p;
            const char* b = comma;
            while (a < b && (*a == ' ' || *a == '\t')) ++a;
            while (b > a && (b[-1] == ' ' || b[-1] == '\t')) --b;
            float v = 0.0f;
            const auto res = std::from_chars(a, b, v);
            if (res.ec != std::errc() || res.ptr != b) {
                throw FormatError("csv: unparsable value on line " + std::to_string(line_no));
            }
            m.values.push_back(v);
            ++fields;
            if (comma == end) break;
            p = comma + 1;
        }

        if (m.rows == 0) {
            m.cols = fields;
        } else if (fields != m.cols) {
            throw FormatError("csv: line " + std::to_string(line_no) + " has " +
                              std::to_string(fields) + " fields, expected " +
                              std::to_string(m.cols));
        }
        ++m.rows;
    }
    if (m.rows == 0) {
        throw FormatError("csv: no rows");
    }
    require_finite(m, "read_csv_matrix");
    return m;
}

void save_matrix(const DenseMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    try {
        write_matrix(m, out);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open: " + path.string());
    }
    char magic[8];
    in.read(magic, 8);
    const bool binary = in.gcount() == 8 && std::memcmp(magic, kMatrixMagic, 8) == 0;
    in.clear();
    in.seekg(0);
    try {
        return binary ? read_matrix(in) : read_csv_matrix(in);
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Bundles
// ---------------------------------------------------------------------------

int CheckpointBundle::target_index(const std::string& name) const {
    for (std::size_t i = 0; i < target_names.size(); ++i) {
        if (target_names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::size_t CheckpointBundle::target_rows(std::size_t index) const {
    return checkpoints.at(0).targets.at(index).rows;
}

void finalize_bundle(CheckpointBundle& bundle) {
    if (bundle.checkpoints.empty()) {
        throw ValidationError("bundle: at least one checkpoint required");
    }
    const auto& first = bundle.checkpoints.front();
    bundle.train_count = first.train.rows;
    bundle.channel_count = first.train.cols;
    if (bundle.train_count == 0 || bundle.channel_count == 0) {
        throw ValidationError("bundle: empty training matrix");
    }

    for (std::size_t t = 0; t < bundle.checkpoints.size(); ++t) {
        const auto& ck = bundle.checkpoints[t];
        const std::string where = "checkpoint " + std::to_string(ck.step_id);
        if (!(ck.learning_rate > 0.0)) {
            throw ValidationError(where + ": learning_rate must be > 0");
        }
        if (ck.train.rows != bundle.train_count) {
            throw ValidationError(where + ": train rows " + std::to_string(ck.train.rows) +
                                  " != " + std::to_string(bundle.train_count));
        }
        if (ck.train.cols != bundle.channel_count) {
            throw ValidationError(where + ": train cols " + std::to_string(ck.train.cols) +
                                  " != " + std::to_string(bundle.channel_count));
        }
        if (ck.targets.size() != bundle.target_names.size()) {
            throw ValidationError(where + ": target count mismatch");
        }
        for (std::size_t b = 0; b < ck.targets.size(); ++b) {
            const auto& tm = ck.targets[b];
            if (tm.cols != bundle.channel_count) {
                throw ValidationError(where + ": target '" + bundle.target_names[b] +
                                      "' cols " + std::to_string(tm.cols) + " != " +
                                      std::to_string(bundle.channel_count));
            }
            if (tm.rows == 0) {
                throw ValidationError(where + ": target '" + bundle.target_names[b] +
                                      "' has no rows");
            }
            if (tm.rows != bundle.checkpoints.front().targets[b].rows) {
                throw ValidationError(where + ": target '" + bundle.target_names[b] +
                                      "' rows differ across checkpoints");
            }
        }
    }
}

CheckpointBundle read_bundle(std::istream& manifest, const std::filesystem::path& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(manifest);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("checkpoints") || !doc["checkpoints"].is_array()) {
        throw FormatError("manifest: missing \"checkpoints\" array");
    }
    const auto& cks = doc["checkpoints"];
    if (cks.empty()) {
        throw ValidationError("manifest: at least one checkpoint required");
    }

    const auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };

    CheckpointBundle bundle;

    // Canonical target order: sorted names from the first checkpoint entry.
    std::vector<std::string> names;
    for (const auto& [name, unused] : cks.at(0).at("targets").items()) {
        (void)unused;
        names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    bundle.target_names = names;

    for (const auto& entry : cks) {
        CheckpointGradients ck;
        try {
            ck.step_id = entry.at("step_id").get<std::int64_t>();
            ck.learning_rate = entry.at("learning_rate").get<double>();
            ck.train = load_matrix(resolve(entry.at("train").get<std::string>()));
            const auto& targets = entry.at("targets");
            for (const auto& name : bundle.target_names) {
                if (!targets.contains(name)) {
                    throw ValidationError("checkpoint " + std::to_string(ck.step_id) +
                                          ": missing target '" + name + "'");
                }
                ck.targets.push_back(load_matrix(resolve(targets.at(name).get<std::string>())));
            }
            if (targets.size() != bundle.target_names.size()) {
                throw ValidationError("checkpoint " + std::to_string(ck.step_id) +
                                      ": target names differ across checkpoints");
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("manifest: ") + e.what());
        }
        bundle.checkpoints.push_back(std::move(ck));
    }

    finalize_bundle(bundle);
    return bundle;
}

CheckpointBundle read_bundle(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw IoError("cannot open manifest: " + manifest_path.string());
    }
    return read_bundle(in, manifest_path.parent_path());
}

std::filesystem::path write_bundle(const CheckpointBundle& bundle,
                                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["checkpoints"] = nlohmann::json::array();

    for (const auto& ck : bundle.checkpoints) {
        nlohmann::json entry;
        entry["step_id"] = ck.step_id;
        entry["learning_rate"] = ck.learning_rate;
        const std::string train_name = "ckpt" + std::to_string(ck.step_id) + "_train.smat";
        save_matrix(ck.train, dir / train_name);
        entry["train"] = train_name;
        nlohmann::json targets = nlohmann::json::object();
        for (std::size_t b = 0; b < bundle.target_names.size(); ++b) {
            const std::string tname =
                "ckpt" + std::to_string(ck.step_id) + "_target_" + bundle.target_names[b] + ".smat";
            save_matrix(ck.targets[b], dir / tname);
            targets[bundle.target_names[b]] = tname;
        }
        entry["targets"] = targets;
        manifest["checkpoints"].push_back(entry);
    }

    const auto manifest_path = dir / "manifest.json";
    std::ofstream out(manifest_path);
    if (!out) {
        throw IoError("cannot write manifest: " + manifest_path.string());
    }
    out << manifest.dump(2) << "\n";
    return manifest_path;
}

}  // namespace seed
