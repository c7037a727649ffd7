#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sgwr/error.hpp"
#include "sgwr/pose.hpp"

namespace sgwr {

using nlohmann::json;

std::string write_sequence(const PoseSequence& seq) {
  std::string out;
  out += "{\n";
  out += " \"version\": " + std::to_string(kSequenceFormatVersion) + ",\n";
  out += " \"label\": " + json(seq.label).dump() + ",\n";
  out += " \"source_dims\": " + json::array({seq.source_dims.width, seq.source_dims.height}).dump() + ",\n";
  out += " \"frames\": [";
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& f = seq.frames[i];
    json joints = json::array();
    for (const auto& k : f.joints) joints.push_back(json::array({k.x, k.y, k.confidence}));
    out += i == 0 ? "\n  " : ",\n  ";
    out += "{\"index\": " + std::to_string(f.frame_index) + ", \"joints\": " + joints.dump() + "}";
  }
  out += seq.frames.empty() ? "]\n" : "\n ]\n";
  out += "}\n";
  return out;
}

PoseSequence read_sequence(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("sequence file: ") + e.what());
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != kSequenceFormatVersion) {
      throw VersionError("sequence file: unsupported version " + std::to_string(version));
    }
    PoseSequence seq;
    seq.label = doc.at("label").get<std::string>();
    const auto& dims = doc.at("source_dims");
    seq.source_dims = ImageDims{dims.at(0).get<double>(), dims.at(1).get<double>()};
    for (const auto& fj : doc.at("frames")) {
      KeypointFrame f;
      f.frame_index = fj.at("index").get<std::size_t>();
      const auto& joints = fj.at("joints");
      if (joints.size() != kJointCount) {
        throw MalformedFrameError("sequence file: frame " + std::to_string(f.frame_index) + " has " +
                                  std::to_string(joints.size()) + " joints");
      }
      for (std::size_t j = 0; j < kJointCount; ++j) {
        const auto& k = joints[j];
        f.joints[j] = Keypoint{k.at(0).get<double>(), k.at(1).get<double>(), k.at(2).get<double>()};
      }
      if (f.frame_index != seq.frames.size()) {
        throw InvariantError("sequence file: frame indices must increase by 1 from 0");
      }
      seq.frames.push_back(f);
    }
    return seq;
  } catch (const json::exception& e) {
    throw FormatError(std::string("sequence file: ") + e.what());
  }
}

void save_sequence_file(const std::string& path, const PoseSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << write_sequence(seq);
}

PoseSequence load_sequence_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return read_sequence(buf.str());
}

}  // namespace sgwr
