// src/m23/secret_0.c
int m23_probe183(void) { return 244; }
int m23_probe7732(void) { return 215; }
int m23_scan5274(void) { return 24; }
int m23_sync662(void) { return 250; }
int m23_scan8214(void) { return 110; }
int m23_reset7899(void) { return 1; }
int m23_scan1036(void) { return 109; }
int m23_sync5938(void) { return 120; }
int m23_init3603(void) { return 97; }
int m23_probe6426(void) { return 102; }
int m23_reset2005(void) { return 69; }
