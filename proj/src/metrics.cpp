#include "srl/metrics.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "srl/errors.hpp"
#include "srl/textio.hpp"

namespace srl {

namespace {
constexpr const char* kHeader = "run_id,seed,episode,return_total,collisions,steps,epsilon";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}
}  // namespace

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
    std::string out = kHeader;
    out.push_back('\n');
    for (const MetricsRow& r : rows) {
        out += r.run_id;
        out += ',' + std::to_string(r.seed);
        out += ',' + std::to_string(r.episode);
        out += ',' + format_double(r.return_total);
        out += ',' + std::to_string(r.collisions);
        out += ',' + std::to_string(r.steps);
        out += ',' + format_double(r.epsilon);
        out.push_back('\n');
    }
    return out;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write metrics file " + path.string());
    file << metrics_to_csv(rows);
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot read metrics file " + path.string());

    std::string line;
    if (!std::getline(file, line) || line != kHeader) {
        throw ParseError(path.string() + ":1: expected header '" + std::string(kHeader) + "'");
    }
    std::vector<MetricsRow> rows;
    std::map<std::pair<std::string, std::uint64_t>, int> last_episode;
    int line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        const auto fields = split(line, ',');
        if (fields.size() != 7) {
            throw ParseError(where + ": expected 7 fields, got " + std::to_string(fields.size()) +
                             " in '" + line + "'");
        }
        MetricsRow r;
        r.run_id = fields[0];
        r.seed = static_cast<std::uint64_t>(parse_int(fields[1], where));
        r.episode = static_cast<int>(parse_int(fields[2], where));
        r.return_total = parse_double(fields[3], where);
        r.collisions = static_cast<int>(parse_int(fields[4], where));
        r.steps = static_cast<int>(parse_int(fields[5], where));
        r.epsilon = parse_double(fields[6], where);

        auto [it, fresh] = last_episode.try_emplace({r.run_id, r.seed}, r.episode);
        if (!fresh) {
            if (r.episode <= it->second) {
                throw ParseError(where + ": episode " + std::to_string(r.episode) +
                                 " not increasing for run '" + r.run_id + "' seed " +
                                 std::to_string(r.seed));
            }
            it->second = r.episode;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace srl
