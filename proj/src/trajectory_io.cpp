#include "bohmion/trajectory_io.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "bohmion/error.hpp"

namespace bohmion {

namespace {

void write_rows(std::ostream& out, const Trajectory& trajectory, const std::string& prefix) {
    const std::string mode = mode_label(trajectory.mode);
    for (const auto& s : trajectory.samples) {
        out << prefix << s.time << ',' << s.x.x1 << ',' << s.v.v1 << ',' << s.x.x2 << ',' << s.v.v2
            << ',' << (s.alive1 ? 1 : 0) << ',' << (s.alive2 ? 1 : 0) << ',' << mode << '\n';
    }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    }
    out << std::setprecision(12);
    return out;
}

} // namespace

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
    auto out = open_for_write(path);
    out << "t,x1,v1,x2,v2,alive1,alive2,mode\n";
    write_rows(out, trajectory, "");
    if (!out) {
        throw Error(ErrorKind::io, "write failed for " + path.string());
    }
}

void write_trajectories_csv(const std::filesystem::path& path, std::span<const Trajectory> trajectories,
                            std::span<const std::size_t> seed_ids) {
    if (trajectories.size() != seed_ids.size()) {
        throw Error(ErrorKind::validation, "one seed id per trajectory required");
    }
    auto out = open_for_write(path);
    out << "seed_id,t,x1,v1,x2,v2,alive1,alive2,mode\n";
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        write_rows(out, trajectories[i], std::to_string(seed_ids[i]) + ",");
    }
    if (!out) {
        throw Error(ErrorKind::io, "write failed for " + path.string());
    }
}

std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open " + path.string());
    }
    std::string header;
    std::getline(in, header);
    const bool with_ids = header.rfind("seed_id", 0) == 0;
    std::vector<Trajectory> out;
    std::map<long, std::size_t> slot;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        const std::size_t base = with_ids ? 1 : 0;
        if (cells.size() < base + 7) {
            throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": too few columns");
        }
        const long id = with_ids ? std::stol(cells[0]) : 0;
        auto [it, inserted] = slot.try_emplace(id, out.size());
        if (inserted) {
            out.emplace_back();
        }
        BohmianState s;
        s.time = std::stod(cells[base + 0]);
        s.x.x1 = std::stod(cells[base + 1]);
        s.v.v1 = std::stod(cells[base + 2]);
        s.x.x2 = std::stod(cells[base + 3]);
        s.v.v2 = std::stod(cells[base + 4]);
        s.alive1 = cells[base + 5] == "1";
        s.alive2 = cells[base + 6] == "1";
        Trajectory& t = out[it->second];
        if (t.samples.empty()) {
            t.seed = s.x;
        }
        t.samples.push_back(s);
    }
    return out;
}

} // namespace bohmion
