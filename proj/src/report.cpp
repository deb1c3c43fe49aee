#include "msde/report.hpp"

#include <json.hpp>

namespace msde {

std::string report_to_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  j["meta"] = report.meta;
  j["all_pass"] = report.all_pass();
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    nlohmann::ordered_json je;
    je["name"] = e.name;
    je["value"] = std::isfinite(e.value) ? nlohmann::ordered_json(e.value)
                                         : nlohmann::ordered_json("inf");
    je["target"] = e.target;
    je["tol"] = e.tol;
    if (e.se)
      je["se"] = *e.se;
    else
      je["se"] = nullptr;
    je["pass"] = e.pass;
    if (!e.note.empty()) je["note"] = e.note;
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

}  // namespace msde
