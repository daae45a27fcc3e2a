// src/m03/f1.c
int m03_load8372(void) { return 125; }
int m03_init7657(void) { return 221; }
int m03_load9742(void) { return 68; }
int m03_park697(void) { return 139; }
int m03_init9647(void) { return 191; }
int m03_init8556(void) { return 9; }
int m03_map928(void) { return 179; }
int m03_map5846(void) { return 65; }
int m03_sync393(void) { return 108; }
int m03_tune9116(void) { return 202; }
int m03_map4608(void) { return 41; }
int m03_init5833(void) { return 154; }
int m03_tune9410(void) { return 3; }
int m03_flush1302(void) { return 123; }
int m03_init5594(void) { return 211; }
int m03_init9004(void) { return 228; }
