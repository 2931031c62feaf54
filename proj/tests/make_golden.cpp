// Regenerates the committed golden files: make_golden <output dir>.

#include <iostream>

#include "facemotion/motion_io.hpp"
#include "facemotion/synth.hpp"
#include "golden.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_golden <output dir>\n";
    return 2;
  }
  facemotion::SynthConfig cfg;
  const auto doc = golden::landmarks_document(facemotion::make_model(cfg));
  facemotion::write_file_text(std::filesystem::path(argv[1]) / "seed0_landmarks.json", doc.dump(2) + "\n");
  return 0;
}
