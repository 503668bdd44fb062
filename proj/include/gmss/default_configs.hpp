#pragma once

// Default montage and region partition shipped with the library, embedded so
// the CLI works without external files. data/montage62.json and
// data/partition62.json carry the same content and are the user-replaceable
// source of truth; a unit test keeps file and header in sync.
//
// Electrode order follows the Table-1 region blocks (Pre-Frontal first), so
// the default partition occupies contiguous ascending row ranges and the
// identity block permutation is a true no-op on the feature matrix.

namespace gmss {

inline const char* default_montage_json() {
  return R"gmss({
 "electrodes": [
  {
   "name": "AF3",
   "x": -0.1646,
   "y": 0.5415
  },
  {
   "name": "FP1",
   "x": -0.2163,
   "y": 0.6657
  },
  {
   "name": "FPZ",
   "x": 0.0,
   "y": 0.7
  },
  {
   "name": "FP2",
   "x": 0.2163,
   "y": 0.6657
  },
  {
   "name": "AF4",
   "x": 0.1646,
   "y": 0.5415
  },
  {
   "name": "F1",
   "x": -0.1416,
   "y": 0.3654
  },
  {
   "name": "FZ",
   "x": 0.0,
   "y": 0.35
  },
  {
   "name": "F2",
   "x": 0.1416,
   "y": 0.3654
  },
  {
   "name": "FC1",
   "x": -0.1664,
   "y": 0.1853
  },
  {
   "name": "FCZ",
   "x": 0.0,
   "y": 0.175
  },
  {
   "name": "FC2",
   "x": 0.1664,
   "y": 0.1853
  },
  {
   "name": "F7",
   "x": -0.5663,
   "y": 0.4114
  },
  {
   "name": "F5",
   "x": -0.4247,
   "y": 0.3961
  },
  {
   "name": "F3",
   "x": -0.2832,
   "y": 0.3807
  },
  {
   "name": "FT7",
   "x": -0.6657,
   "y": 0.2163
  },
  {
   "name": "FC5",
   "x": -0.4993,
   "y": 0.206
  },
  {
   "name": "FC3",
   "x": -0.3329,
   "y": 0.1957
  },
  {
   "name": "F4",
   "x": 0.2832,
   "y": 0.3807
  },
  {
   "name": "F6",
   "x": 0.4247,
   "y": 0.3961
  },
  {
   "name": "F8",
   "x": 0.5663,
   "y": 0.4114
  },
  {
   "name": "FC4",
   "x": 0.3329,
   "y": 0.1957
  },
  {
   "name": "FC6",
   "x": 0.4993,
   "y": 0.206
  },
  {
   "name": "FT8",
   "x": 0.6657,
   "y": 0.2163
  },
  {
   "name": "T7",
   "x": -0.7,
   "y": 0.0
  },
  {
   "name": "C5",
   "x": -0.525,
   "y": 0.0
  },
  {
   "name": "C3",
   "x": -0.35,
   "y": 0.0
  },
  {
   "name": "TP7",
   "x": -0.6657,
   "y": -0.2163
  },
  {
   "name": "CP5",
   "x": -0.4993,
   "y": -0.206
  },
  {
   "name": "CP3",
   "x": -0.3329,
   "y": -0.1957
  },
  {
   "name": "C4",
   "x": 0.35,
   "y": 0.0
  },
  {
   "name": "C6",
   "x": 0.525,
   "y": 0.0
  },
  {
   "name": "T8",
   "x": 0.7,
   "y": 0.0
  },
  {
   "name": "CP4",
   "x": 0.3329,
   "y": -0.1957
  },
  {
   "name": "CP6",
   "x": 0.4993,
   "y": -0.206
  },
  {
   "name": "TP8",
   "x": 0.6657,
   "y": -0.2163
  },
  {
   "name": "C1",
   "x": -0.175,
   "y": 0.0
  },
  {
   "name": "CZ",
   "x": 0.0,
   "y": 0.0
  },
  {
   "name": "C2",
   "x": 0.175,
   "y": 0.0
  },
  {
   "name": "CP1",
   "x": -0.1664,
   "y": -0.1853
  },
  {
   "name": "CPZ",
   "x": 0.0,
   "y": -0.175
  },
  {
   "name": "CP2",
   "x": 0.1664,
   "y": -0.1853
  },
  {
   "name": "P1",
   "x": -0.1416,
   "y": -0.3654
  },
  {
   "name": "PZ",
   "x": 0.0,
   "y": -0.35
  },
  {
   "name": "P2",
   "x": 0.1416,
   "y": -0.3654
  },
  {
   "name": "P7",
   "x": -0.5663,
   "y": -0.4114
  },
  {
   "name": "P5",
   "x": -0.4247,
   "y": -0.3961
  },
  {
   "name": "P3",
   "x": -0.2832,
   "y": -0.3807
  },
  {
   "name": "PO7",
   "x": -0.4114,
   "y": -0.5663
  },
  {
   "name": "PO5",
   "x": -0.2743,
   "y": -0.5525
  },
  {
   "name": "CB1",
   "x": -0.4025,
   "y": -0.6972
  },
  {
   "name": "P4",
   "x": 0.2832,
   "y": -0.3807
  },
  {
   "name": "P6",
   "x": 0.4247,
   "y": -0.3961
  },
  {
   "name": "P8",
   "x": 0.5663,
   "y": -0.4114
  },
  {
   "name": "PO6",
   "x": 0.2743,
   "y": -0.5525
  },
  {
   "name": "PO8",
   "x": 0.4114,
   "y": -0.5663
  },
  {
   "name": "CB2",
   "x": 0.4025,
   "y": -0.6972
  },
  {
   "name": "PO3",
   "x": -0.1371,
   "y": -0.5388
  },
  {
   "name": "POZ",
   "x": 0.0,
   "y": -0.525
  },
  {
   "name": "PO4",
   "x": 0.1371,
   "y": -0.5388
  },
  {
   "name": "O1",
   "x": -0.2163,
   "y": -0.6657
  },
  {
   "name": "OZ",
   "x": 0.0,
   "y": -0.7
  },
  {
   "name": "O2",
   "x": 0.2163,
   "y": -0.6657
  }
 ],
 "edges": [
  [
   0,
   1
  ],
  [
   0,
   5
  ],
  [
   0,
   13
  ],
  [
   1,
   2
  ],
  [
   2,
   3
  ],
  [
   3,
   4
  ],
  [
   4,
   7
  ],
  [
   4,
   17
  ],
  [
   5,
   6
  ],
  [
   5,
   8
  ],
  [
   5,
   13
  ],
  [
   6,
   7
  ],
  [
   6,
   9
  ],
  [
   7,
   10
  ],
  [
   7,
   17
  ],
  [
   8,
   9
  ],
  [
   8,
   16
  ],
  [
   8,
   35
  ],
  [
   9,
   10
  ],
  [
   9,
   36
  ],
  [
   10,
   20
  ],
  [
   10,
   37
  ],
  [
   11,
   12
  ],
  [
   11,
   14
  ],
  [
   11,
   15
  ],
  [
   12,
   13
  ],
  [
   12,
   15
  ],
  [
   13,
   16
  ],
  [
   14,
   15
  ],
  [
   14,
   23
  ],
  [
   15,
   16
  ],
  [
   15,
   24
  ],
  [
   16,
   25
  ],
  [
   17,
   18
  ],
  [
   17,
   20
  ],
  [
   18,
   19
  ],
  [
   18,
   21
  ],
  [
   19,
   21
  ],
  [
   19,
   22
  ],
  [
   20,
   21
  ],
  [
   20,
   29
  ],
  [
   21,
   22
  ],
  [
   21,
   30
  ],
  [
   22,
   31
  ],
  [
   23,
   24
  ],
  [
   23,
   26
  ],
  [
   24,
   25
  ],
  [
   24,
   27
  ],
  [
   25,
   28
  ],
  [
   25,
   35
  ],
  [
   26,
   27
  ],
  [
   26,
   44
  ],
  [
   27,
   28
  ],
  [
   27,
   44
  ],
  [
   27,
   45
  ],
  [
   28,
   38
  ],
  [
   28,
   46
  ],
  [
   29,
   30
  ],
  [
   29,
   32
  ],
  [
   29,
   37
  ],
  [
   30,
   31
  ],
  [
   30,
   33
  ],
  [
   31,
   34
  ],
  [
   32,
   33
  ],
  [
   32,
   40
  ],
  [
   32,
   50
  ],
  [
   33,
   34
  ],
  [
   33,
   51
  ],
  [
   33,
   52
  ],
  [
   34,
   52
  ],
  [
   35,
   36
  ],
  [
   35,
   38
  ],
  [
   36,
   37
  ],
  [
   36,
   39
  ],
  [
   37,
   40
  ],
  [
   38,
   39
  ],
  [
   38,
   41
  ],
  [
   39,
   40
  ],
  [
   39,
   42
  ],
  [
   40,
   43
  ],
  [
   41,
   42
  ],
  [
   41,
   46
  ],
  [
   41,
   56
  ],
  [
   41,
   57
  ],
  [
   42,
   43
  ],
  [
   42,
   57
  ],
  [
   43,
   50
  ],
  [
   43,
   57
  ],
  [
   43,
   58
  ],
  [
   44,
   45
  ],
  [
   44,
   47
  ],
  [
   45,
   46
  ],
  [
   45,
   47
  ],
  [
   45,
   48
  ],
  [
   46,
   48
  ],
  [
   46,
   56
  ],
  [
   47,
   48
  ],
  [
   47,
   49
  ],
  [
   47,
   59
  ],
  [
   48,
   49
  ],
  [
   48,
   56
  ],
  [
   48,
   59
  ],
  [
   49,
   59
  ],
  [
   50,
   51
  ],
  [
   50,
   53
  ],
  [
   50,
   58
  ],
  [
   51,
   52
  ],
  [
   51,
   53
  ],
  [
   51,
   54
  ],
  [
   52,
   54
  ],
  [
   53,
   54
  ],
  [
   53,
   55
  ],
  [
   53,
   58
  ],
  [
   53,
   61
  ],
  [
   54,
   55
  ],
  [
   54,
   61
  ],
  [
   55,
   61
  ],
  [
   56,
   57
  ],
  [
   56,
   59
  ],
  [
   56,
   60
  ],
  [
   57,
   58
  ],
  [
   57,
   60
  ],
  [
   58,
   60
  ],
  [
   58,
   61
  ],
  [
   59,
   60
  ],
  [
   60,
   61
  ]
 ]
}
)gmss";
}

inline const char* default_partition_json() {
  return R"gmss({
 "regions": [
  {
   "name": "Pre-Frontal",
   "electrodes": [
    "AF3",
    "FP1",
    "FPZ",
    "FP2",
    "AF4"
   ]
  },
  {
   "name": "Frontal",
   "electrodes": [
    "F1",
    "FZ",
    "F2",
    "FC1",
    "FCZ",
    "FC2"
   ]
  },
  {
   "name": "Left Frontal",
   "electrodes": [
    "F7",
    "F5",
    "F3",
    "FT7",
    "FC5",
    "FC3"
   ]
  },
  {
   "name": "Right Frontal",
   "electrodes": [
    "F4",
    "F6",
    "F8",
    "FC4",
    "FC6",
    "FT8"
   ]
  },
  {
   "name": "Left Temporal",
   "electrodes": [
    "T7",
    "C5",
    "C3",
    "TP7",
    "CP5",
    "CP3"
   ]
  },
  {
   "name": "Right Temporal",
   "electrodes": [
    "C4",
    "C6",
    "T8",
    "CP4",
    "CP6",
    "TP8"
   ]
  },
  {
   "name": "Central",
   "electrodes": [
    "C1",
    "CZ",
    "C2",
    "CP1",
    "CPZ",
    "CP2",
    "P1",
    "PZ",
    "P2"
   ]
  },
  {
   "name": "Left Parietal",
   "electrodes": [
    "P7",
    "P5",
    "P3",
    "PO7",
    "PO5",
    "CB1"
   ]
  },
  {
   "name": "Right Parietal",
   "electrodes": [
    "P4",
    "P6",
    "P8",
    "PO6",
    "PO8",
    "CB2"
   ]
  },
  {
   "name": "Occipital",
   "electrodes": [
    "PO3",
    "POZ",
    "PO4",
    "O1",
    "OZ",
    "O2"
   ]
  }
 ]
}
)gmss";
}

}  // namespace gmss
