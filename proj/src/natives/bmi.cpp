#include <cstdio>

#include "cnp/error.hpp"
#include "cnp/natives.hpp"

namespace cnp {

std::string_view to_string(BmiCategory category) {
  switch (category) {
    case BmiCategory::Thin: return "Thin";
    case BmiCategory::Healthy: return "Healthy";
    case BmiCategory::Overweight: return "Overweight";
    case BmiCategory::Obese: return "Obese";
  }
  return "Thin";
}

BmiCategory classify_bmi_value(double bmi) {
  if (bmi < 19) return BmiCategory::Thin;
  if (bmi < 25) return BmiCategory::Healthy;
  if (bmi < 30) return BmiCategory::Overweight;
  return BmiCategory::Obese;
}

BmiReading classify_bmi(std::int64_t kg, std::int64_t cm) {
  if (kg <= 0 || cm <= 0) throw NonPositiveInput("weight and height must be positive");
  double m = static_cast<double>(cm) / 100;
  double bmi = static_cast<double>(kg) / (m * m);
  return BmiReading{bmi, classify_bmi_value(bmi)};
}

std::string format_bmi(double bmi) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", bmi);
  return buf;
}

}  // namespace cnp
