#include "ionpulse/io.hpp"

#include <fstream>
#include <sstream>

namespace ionpulse {

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary); // binary: no platform newline translation
    if (!out) throw IoError("cannot open for writing: " + file.string());
    return out;
}

// shortest round-trip representation, locale-independent
std::string number(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

} // namespace

void write_histograms_json(const std::filesystem::path& file, const SimulationOutput& output) {
    nlohmann::ordered_json doc;
    doc["config"] = output.config_echo;
    doc["seed"] = output.seed;
    doc["repetitions"] = output.repetitions;
    auto& points = doc["points"];
    points = nlohmann::ordered_json::array();
    for (const auto& point : output.points) {
        nlohmann::ordered_json entry;
        entry["energy_j"] = point.energy.joules();
        entry["total"] = point.histogram.total();
        auto& bins = entry["bins"];
        bins = nlohmann::ordered_json::object();
        for (const auto& [count, occurrences] : point.histogram.bins())
            bins[std::to_string(count)] = occurrences;
        points.push_back(std::move(entry));
    }
    auto out = open_out(file);
    out << doc.dump(2) << '\n';
}

SimulationOutput read_histograms_json(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open histogram file: " + file.string());
    nlohmann::ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& err) {
        throw IoError(file.string() + ": invalid JSON: " + err.what());
    }
    SimulationOutput output;
    try {
        output.config_echo = doc.at("config");
        output.seed = doc.at("seed").get<std::uint64_t>();
        output.repetitions = doc.at("repetitions").get<int>();
        for (const auto& entry : doc.at("points")) {
            EnergyHistogram point;
            point.energy = Energy(entry.at("energy_j").get<double>());
            for (const auto& [key, value] : entry.at("bins").items())
                point.histogram.add_bin(std::stoi(key), value.get<std::uint64_t>());
            if (point.histogram.total() != entry.at("total").get<std::uint64_t>())
                throw IoError(file.string() + ": histogram total mismatch");
            output.points.push_back(std::move(point));
        }
    } catch (const nlohmann::json::exception& err) {
        throw IoError(file.string() + ": missing or malformed field: " + err.what());
    }
    return output;
}

void write_histograms_csv(const std::filesystem::path& file, const SimulationOutput& output) {
    auto out = open_out(file);
    out << "energy_j,count,occurrences\n";
    for (const auto& point : output.points)
        for (const auto& [count, occurrences] : point.histogram.bins())
            out << number(point.energy.joules()) << ',' << count << ',' << occurrences << '\n';
}

void write_rabi_points_csv(const std::filesystem::path& file,
                           std::span<const RabiDataPoint> points) {
    auto out = open_out(file);
    out << "c_sc,population,population_std_error\n";
    for (const auto& p : points)
        out << number(p.scatter_counts) << ',' << number(p.excited_population) << ','
            << number(p.population_std_error) << '\n';
}

std::vector<RabiDataPoint> read_rabi_points_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open rabi data file: " + file.string());
    std::vector<RabiDataPoint> points;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line_number == 1 && line.rfind("c_sc", 0) == 0) continue; // header
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream fields(line);
        RabiDataPoint p;
        char comma1 = 0, comma2 = 0;
        if (!(fields >> p.scatter_counts >> comma1 >> p.excited_population >> comma2 >>
              p.population_std_error) ||
            comma1 != ',' || comma2 != ',')
            throw IoError(file.string() + ":" + std::to_string(line_number) +
                          ": expected 'c_sc,population,population_std_error'");
        points.push_back(p);
    }
    return points;
}

void write_band_csv(const std::filesystem::path& file, const RabiCurveModel& model,
                    std::span<const BandPoint> band) {
    auto out = open_out(file);
    out << "c_sc,curve,lower,upper\n";
    for (const auto& b : band)
        out << number(b.scatter_counts) << ',' << number(model.predict(b.scatter_counts))
            << ',' << number(b.lower) << ',' << number(b.upper) << '\n';
}

} // namespace ionpulse
