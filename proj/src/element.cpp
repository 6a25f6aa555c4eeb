#include "molblocks/element.h"

#include <array>
#include <stdexcept>
#include <string>

namespace molblocks {
namespace {

// Masses are IUPAC conventional/standard atomic weights; bracketed values
// for elements without stable isotopes use the longest-lived mass number.
constexpr std::array<Element, 119> kElements{{
    {0, "*", 0.0},        {1, "H", 1.008},      {2, "He", 4.0026},
    {3, "Li", 6.94},      {4, "Be", 9.0122},    {5, "B", 10.81},
    {6, "C", 12.011},     {7, "N", 14.007},     {8, "O", 15.999},
    {9, "F", 18.998},     {10, "Ne", 20.180},   {11, "Na", 22.990},
    {12, "Mg", 24.305},   {13, "Al", 26.982},   {14, "Si", 28.085},
    {15, "P", 30.974},    {16, "S", 32.06},     {17, "Cl", 35.45},
    {18, "Ar", 39.948},   {19, "K", 39.098},    {20, "Ca", 40.078},
    {21, "Sc", 44.956},   {22, "Ti", 47.867},   {23, "V", 50.942},
    {24, "Cr", 51.996},   {25, "Mn", 54.938},   {26, "Fe", 55.845},
    {27, "Co", 58.933},   {28, "Ni", 58.693},   {29, "Cu", 63.546},
    {30, "Zn", 65.38},    {31, "Ga", 69.723},   {32, "Ge", 72.630},
    {33, "As", 74.922},   {34, "Se", 78.971},   {35, "Br", 79.904},
    {36, "Kr", 83.798},   {37, "Rb", 85.468},   {38, "Sr", 87.62},
    {39, "Y", 88.906},    {40, "Zr", 91.224},   {41, "Nb", 92.906},
    {42, "Mo", 95.95},    {43, "Tc", 98.0},     {44, "Ru", 101.07},
    {45, "Rh", 102.91},   {46, "Pd", 106.42},   {47, "Ag", 107.87},
    {48, "Cd", 112.41},   {49, "In", 114.82},   {50, "Sn", 118.71},
    {51, "Sb", 121.76},   {52, "Te", 127.60},   {53, "I", 126.90},
    {54, "Xe", 131.29},   {55, "Cs", 132.91},   {56, "Ba", 137.33},
    {57, "La", 138.91},   {58, "Ce", 140.12},   {59, "Pr", 140.91},
    {60, "Nd", 144.24},   {61, "Pm", 145.0},    {62, "Sm", 150.36},
    {63, "Eu", 151.96},   {64, "Gd", 157.25},   {65, "Tb", 158.93},
    {66, "Dy", 162.50},   {67, "Ho", 164.93},   {68, "Er", 167.26},
    {69, "Tm", 168.93},   {70, "Yb", 173.05},   {71, "Lu", 174.97},
    {72, "Hf", 178.49},   {73, "Ta", 180.95},   {74, "W", 183.84},
    {75, "Re", 186.21},   {76, "Os", 190.23},   {77, "Ir", 192.22},
    {78, "Pt", 195.08},   {79, "Au", 196.97},   {80, "Hg", 200.59},
    {81, "Tl", 204.38},   {82, "Pb", 207.2},    {83, "Bi", 208.98},
    {84, "Po", 209.0},    {85, "At", 210.0},    {86, "Rn", 222.0},
    {87, "Fr", 223.0},    {88, "Ra", 226.0},    {89, "Ac", 227.0},
    {90, "Th", 232.04},   {91, "Pa", 231.04},   {92, "U", 238.03},
    {93, "Np", 237.0},    {94, "Pu", 244.0},    {95, "Am", 243.0},
    {96, "Cm", 247.0},    {97, "Bk", 247.0},    {98, "Cf", 251.0},
    {99, "Es", 252.0},    {100, "Fm", 257.0},   {101, "Md", 258.0},
    {102, "No", 259.0},   {103, "Lr", 266.0},   {104, "Rf", 267.0},
    {105, "Db", 268.0},   {106, "Sg", 269.0},   {107, "Bh", 270.0},
    {108, "Hs", 277.0},   {109, "Mt", 278.0},   {110, "Ds", 281.0},
    {111, "Rg", 282.0},   {112, "Cn", 285.0},   {113, "Nh", 286.0},
    {114, "Fl", 289.0},   {115, "Mc", 290.0},   {116, "Lv", 293.0},
    {117, "Ts", 294.0},   {118, "Og", 294.0},
}};

constexpr std::array<int, 0> kNone{};
constexpr std::array<int, 1> k0{0};
constexpr std::array<int, 1> k1{1};
constexpr std::array<int, 1> k2{2};
constexpr std::array<int, 1> k3{3};
constexpr std::array<int, 1> k4{4};
constexpr std::array<int, 2> k35{3, 5};
constexpr std::array<int, 3> k135{1, 3, 5};
constexpr std::array<int, 3> k246{2, 4, 6};
constexpr std::array<int, 4> k1357{1, 3, 5, 7};

}  // namespace

const Element& element(int atomic_number) {
  if (atomic_number < 0 || atomic_number > max_atomic_number()) {
    throw std::out_of_range("atomic number out of range: " +
                            std::to_string(atomic_number));
  }
  return kElements[static_cast<std::size_t>(atomic_number)];
}

std::optional<int> atomic_number_of(std::string_view symbol) {
  for (const auto& e : kElements) {
    if (e.symbol == symbol) return e.atomic_number;
  }
  return std::nullopt;
}

int max_atomic_number() { return static_cast<int>(kElements.size()) - 1; }

bool is_organic_subset(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 9:
    case 15: case 16: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

bool can_be_aromatic(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 15: case 16:
    case 33: case 34: case 52:
      return true;
    default:
      return false;
  }
}

std::span<const int> allowed_valences(int z, int charge) {
  switch (z) {
    case 1:
      if (charge == 0) return k1;
      if (charge == 1 || charge == -1) return k0;
      break;
    case 5:
      if (charge == 0) return k3;
      if (charge == -1) return k4;
      if (charge == 1) return k2;
      break;
    case 6:
    case 14:
      if (charge == 0) return k4;
      if (charge == 1 || charge == -1) return k3;
      break;
    case 7:
      if (charge == 0) return k3;
      if (charge == 1) return k4;
      if (charge == -1) return k2;
      break;
    case 15:
    case 33:
      if (charge == 0) return k35;
      if (charge == 1) return k4;
      if (charge == -1) return k2;
      break;
    case 8:
      if (charge == 0) return k2;
      if (charge == 1) return k3;
      if (charge == -1) return k1;
      break;
    case 16:
    case 34:
    case 52:
      if (charge == 0) return k246;
      if (charge == 1) return k35;
      if (charge == -1) return k135;
      break;
    case 9:
      if (charge == 0) return k1;
      if (charge == 1) return k2;
      if (charge == -1) return k0;
      break;
    case 17:
    case 35:
    case 53:
      if (charge == 0) return k1357;
      if (charge == 1) return k2;
      if (charge == -1) return k0;
      break;
    default:
      break;
  }
  return kNone;
}

std::span<const int> default_valences(int z) {
  switch (z) {
    case 5: return k3;
    case 6: return k4;
    case 7: return k3;
    case 8: return k2;
    case 15: return k35;
    case 16: return k246;
    case 9: case 17: case 35: case 53: return k1;
    default: return kNone;
  }
}

}  // namespace molblocks
