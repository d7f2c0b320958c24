//
// Copyright 2026 The dpcore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Regenerates the seeded fixture files under fixtures/. The outputs are
// committed so the shipped demos and tests are reproducible offline; rerun
// only when the fixture design changes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "dp/random.hpp"

namespace {

constexpr uint64_t kFixtureSeed = 20260809;

int ClampedAge(dp::RngStream& rng) {
  double age = 40.0 + 18.0 * dp::SampleGaussian(1.0, rng);
  return static_cast<int>(std::clamp(std::nearbyint(age), 0.0, 100.0));
}

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    std::exit(1);
  }
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "fixtures";

  WriteFile(dir + "/ages.schema", "age integer 0 100\n");
  {
    std::string csv = "age\n";
    dp::RngStream rng(kFixtureSeed, 1);
    for (int i = 0; i < 10000; ++i) csv += std::to_string(ClampedAge(rng)) + "\n";
    WriteFile(dir + "/ages.csv", csv);
  }
  WriteFile(dir + "/mean_age.query", "kind mean\ncolumn age\n");
  WriteFile(dir + "/adult_count.query", "kind count\nwhere age >= 18\n");

  WriteFile(dir + "/people.schema",
            "age integer 0 100\n"
            "gender categorical M,F,other\n"
            "region categorical north,south,east,west\n");
  {
    std::string csv = "age,gender,region\n";
    dp::RngStream rng(kFixtureSeed, 2);
    const char* genders[] = {"M", "F", "other"};
    const char* regions[] = {"north", "south", "east", "west"};
    for (int i = 0; i < 2000; ++i) {
      double g = rng.NextUnit();
      const char* gender = g < 0.48 ? genders[0] : g < 0.96 ? genders[1] : genders[2];
      const char* region = regions[rng.NextUint64() % 4];
      csv += std::to_string(ClampedAge(rng)) + "," + gender + "," + region + "\n";
    }
    WriteFile(dir + "/people.csv", csv);
  }
  WriteFile(dir + "/age_gender_region.query",
            "kind histogram\n"
            "dim age edges 0,10,20,30,40,50,60,70,80,90,100\n"
            "dim gender\n"
            "dim region\n");

  std::cout << "fixtures written to " << dir << "\n";
  return 0;
}
