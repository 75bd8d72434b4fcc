namespace feederopt {}
