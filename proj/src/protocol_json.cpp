#include <stdexcept>

#include <json.hpp>

#include "ttpc/protocols.hpp"

namespace ttpc {

namespace {

using nlohmann::json;

std::string_view quad_name(Quadrature q) { return q == Quadrature::X ? "X" : "Y"; }

Quadrature quad_from(const json& j) {
  const auto name = j.get<std::string>();
  if (name == "X") return Quadrature::X;
  if (name == "Y") return Quadrature::Y;
  throw std::invalid_argument("protocol json: quadrature must be \"X\" or \"Y\"");
}

json current_to_json(const PhotocurrentSpec& pc) {
  json terms = json::array();
  for (const DetectedTerm& t : pc.terms)
    terms.push_back({{"mode", t.mode}, {"quadrature", quad_name(t.quadrature)}, {"weight", t.weight}});
  json out{{"terms", terms}};
  if (pc.feedforward) {
    out["feedforward"] = {{"controller", to_string(pc.feedforward->controller)},
                          {"quadrature", quad_name(pc.feedforward->quadrature)},
                          {"sign", pc.feedforward->sign}};
  } else {
    out["feedforward"] = nullptr;
  }
  return out;
}

PhotocurrentSpec current_from_json(const json& j) {
  PhotocurrentSpec pc;
  for (const json& t : j.at("terms"))
    pc.terms.push_back({t.at("mode").get<std::size_t>(), quad_from(t.at("quadrature")),
                        t.at("weight").get<double>()});
  if (j.contains("feedforward") && !j.at("feedforward").is_null()) {
    const json& ff = j.at("feedforward");
    pc.feedforward = Feedforward{station_from_string(ff.at("controller").get<std::string>()),
                                 quad_from(ff.at("quadrature")), ff.at("sign").get<double>()};
  }
  return pc;
}

}  // namespace

std::string protocol_to_json(const ProtocolSpec& spec) {
  json controllers = json::array();
  for (Station c : spec.controllers) controllers.push_back(to_string(c));
  json steps = json::array();
  for (const OpticalStep& s : spec.optical_steps)
    steps.push_back({{"t", s.t}, {"phase", s.phase}, {"modes", {s.mode_i, s.mode_j}}});
  json doc{{"id", to_string(spec.id)},
           {"sender", to_string(spec.sender)},
           {"receiver", to_string(spec.receiver)},
           {"controllers", controllers},
           {"optical_steps", steps},
           {"measured_forms", {{"plus", current_to_json(spec.plus)}, {"minus", current_to_json(spec.minus)}}},
           {"signal_mode", spec.signal_mode},
           {"description", spec.description}};
  return doc.dump(2);
}

ProtocolSpec protocol_from_json(std::string_view text) {
  ProtocolSpec spec;
  try {
    const json doc = json::parse(text);
    spec.id = protocol_from_string(doc.at("id").get<std::string>());
    spec.sender = station_from_string(doc.at("sender").get<std::string>());
    spec.receiver = station_from_string(doc.at("receiver").get<std::string>());
    for (const json& c : doc.at("controllers")) spec.controllers.push_back(station_from_string(c.get<std::string>()));
    for (const json& s : doc.at("optical_steps")) {
      const json& modes = s.at("modes");
      if (!modes.is_array() || modes.size() != 2)
        throw std::invalid_argument("protocol json: optical step needs two modes");
      spec.optical_steps.push_back({s.at("t").get<double>(), s.at("phase").get<double>(),
                                    modes[0].get<std::size_t>(), modes[1].get<std::size_t>()});
    }
    const json& forms = doc.at("measured_forms");
    spec.plus = current_from_json(forms.at("plus"));
    spec.minus = current_from_json(forms.at("minus"));
    spec.signal_mode = doc.at("signal_mode").get<std::size_t>();
    spec.description = doc.value("description", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("protocol json: ") + e.what());
  }
  validate(spec);
  return spec;
}

}  // namespace ttpc
